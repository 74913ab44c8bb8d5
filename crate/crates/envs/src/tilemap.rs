//! Plain-text grid maps, one character per cell.
//!
//! | char | tile |
//! |------|------|
//! | `#`  | wall |
//! | `.`  | floor |
//! | `A`  | agent spawn (floor) |
//! | `B`  | box start (floor) |
//! | `G`  | goal |
//! | `g`  | secondary goal |
//! | `S`  | switch |
//! | `D`  | door |
//!
//! Lines starting with `;` are comments. All map rows must have equal width.

use crate::error::{EnvError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tile {
    Wall,
    Floor,
    Spawn,
    Box,
    Goal,
    NearGoal,
    Switch,
    Door,
}

impl Tile {
    fn from_char(c: char) -> Option<Self> {
        Some(match c {
            '#' => Tile::Wall,
            '.' => Tile::Floor,
            'A' => Tile::Spawn,
            'B' => Tile::Box,
            'G' => Tile::Goal,
            'g' => Tile::NearGoal,
            'S' => Tile::Switch,
            'D' => Tile::Door,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    Up,
    Down,
    Left,
    Right,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::Up, Dir::Down, Dir::Left, Dir::Right];

    pub fn delta(self) -> (isize, isize) {
        match self {
            Dir::Up => (0, -1),
            Dir::Down => (0, 1),
            Dir::Left => (-1, 0),
            Dir::Right => (1, 0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileMap {
    width: usize,
    height: usize,
    tiles: Vec<Tile>,
}

impl TileMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut tiles = Vec::new();
        let mut width = None;
        let mut height = 0;
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with(';') {
                continue;
            }
            let row: Vec<Tile> = line
                .chars()
                .map(|c| {
                    Tile::from_char(c).ok_or_else(|| EnvError::Map {
                        line: line_no + 1,
                        reason: format!("unknown tile `{c}`"),
                    })
                })
                .collect::<Result<_>>()?;
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(EnvError::Map {
                        line: line_no + 1,
                        reason: format!("row has {} cells, expected {w}", row.len()),
                    })
                }
                _ => {}
            }
            tiles.extend(row);
            height += 1;
        }
        let width = width.ok_or(EnvError::Map {
            line: 0,
            reason: "map is empty".into(),
        })?;
        Ok(Self {
            width,
            height,
            tiles,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn tile(&self, cell: usize) -> Tile {
        self.tiles[cell]
    }

    pub fn xy(&self, cell: usize) -> (usize, usize) {
        (cell % self.width, cell / self.width)
    }

    pub fn cell(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn find(&self, tile: Tile) -> Vec<usize> {
        (0..self.tiles.len())
            .filter(|&c| self.tiles[c] == tile)
            .collect()
    }

    /// Neighbouring cell in `dir`, or `None` off the map or into a wall.
    pub fn neighbor(&self, cell: usize, dir: Dir) -> Option<usize> {
        let (x, y) = self.xy(cell);
        let (dx, dy) = dir.delta();
        let nx = x.checked_add_signed(dx).filter(|&v| v < self.width)?;
        let ny = y.checked_add_signed(dy).filter(|&v| v < self.height)?;
        let n = self.cell(nx, ny);
        (self.tiles[n] != Tile::Wall).then_some(n)
    }

    pub fn chebyshev(&self, a: usize, b: usize) -> usize {
        let (ax, ay) = self.xy(a);
        let (bx, by) = self.xy(b);
        ax.abs_diff(bx).max(ay.abs_diff(by))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_shipped_maps() {
        for text in [
            include_str!("../data/go_together.map"),
            include_str!("../data/find_treasure.map"),
            include_str!("../data/cleaner.map"),
            include_str!("../data/move_box.map"),
        ] {
            let m = TileMap::parse(text).unwrap();
            assert_eq!(m.find(Tile::Spawn).len(), 2);
        }
    }

    #[test]
    fn rejects_ragged_rows_and_unknown_chars() {
        assert!(matches!(TileMap::parse("###\n##\n"), Err(EnvError::Map { line: 2, .. })));
        assert!(TileMap::parse("#x#\n").is_err());
        assert!(TileMap::parse("; only a comment\n").is_err());
    }

    #[test]
    fn neighbors_respect_walls_and_edges() {
        let m = TileMap::parse("#..\n#.#\n").unwrap();
        let c = m.cell(1, 0);
        assert_eq!(m.neighbor(c, Dir::Left), None);
        assert_eq!(m.neighbor(c, Dir::Up), None);
        assert_eq!(m.neighbor(c, Dir::Right), Some(m.cell(2, 0)));
        assert_eq!(m.neighbor(c, Dir::Down), Some(m.cell(1, 1)));
        assert_eq!(m.neighbor(m.cell(1, 1), Dir::Right), None);
    }
}
