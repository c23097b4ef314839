//! Grid geometry: positions, tiles and the static map.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Integer grid coordinate. Ordered row-major (`y` first, then `x`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Self {
        Pos { x, y }
    }

    /// Chebyshev (king-move) distance.
    pub fn distance(self, other: Pos) -> u32 {
        (self.x - other.x).unsigned_abs().max((self.y - other.y).unsigned_abs())
    }

    pub fn offset(self, dx: i32, dy: i32) -> Pos {
        Pos::new(self.x + dx, self.y + dy)
    }

    /// The eight Chebyshev neighbours in row-major order.
    pub fn neighbours(self) -> impl Iterator<Item = Pos> {
        NEIGHBOUR_OFFSETS
            .iter()
            .map(move |&(dx, dy)| self.offset(dx, dy))
    }
}

impl Ord for Pos {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Pos {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

const NEIGHBOUR_OFFSETS: [(i32, i32); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TileKind {
    Plain,
    Impassable,
    Hole,
}

impl TileKind {
    pub fn from_char(c: char) -> Option<TileKind> {
        match c {
            '.' => Some(TileKind::Plain),
            '#' => Some(TileKind::Impassable),
            'O' => Some(TileKind::Hole),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            TileKind::Plain => '.',
            TileKind::Impassable => '#',
            TileKind::Hole => 'O',
        }
    }

    /// Only plain tiles can be stood on.
    pub fn is_walkable(self) -> bool {
        self == TileKind::Plain
    }
}

/// Dense rectangular tile grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridMap {
    width: i32,
    height: i32,
    tiles: Vec<TileKind>,
}

impl GridMap {
    pub fn new(width: i32, height: i32, tiles: Vec<TileKind>) -> Option<GridMap> {
        if width < 2 || height < 2 || tiles.len() != (width * height) as usize {
            return None;
        }
        Some(GridMap {
            width,
            height,
            tiles,
        })
    }

    /// Parses a character layout, one string per row. Returns the offending
    /// row and column on an unknown character.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<GridMap, String> {
        let height = rows.len() as i32;
        let width = rows.first().map_or(0, |r| r.as_ref().chars().count()) as i32;
        if width < 2 || height < 2 {
            return Err(format!("map must be at least 2x2, got {width}x{height}"));
        }
        let mut tiles = Vec::with_capacity((width * height) as usize);
        for (y, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.chars().count() as i32 != width {
                return Err(format!("row {y} has length {} (expected {width})", row.chars().count()));
            }
            for (x, c) in row.chars().enumerate() {
                tiles.push(
                    TileKind::from_char(c)
                        .ok_or_else(|| format!("unknown tile character {c:?} at row {y}, column {x}"))?,
                );
            }
        }
        Ok(GridMap {
            width,
            height,
            tiles,
        })
    }

    pub fn to_rows(&self) -> Vec<String> {
        (0..self.height)
            .map(|y| {
                (0..self.width)
                    .map(|x| self.tiles[(y * self.width + x) as usize].to_char())
                    .collect()
            })
            .collect()
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.width && p.y < self.height
    }

    pub fn index(&self, p: Pos) -> usize {
        debug_assert!(self.in_bounds(p));
        (p.y * self.width + p.x) as usize
    }

    pub fn pos_of(&self, index: usize) -> Pos {
        Pos::new(index as i32 % self.width, index as i32 / self.width)
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// Tile at `p`; out-of-bounds reads as impassable.
    pub fn tile(&self, p: Pos) -> TileKind {
        if self.in_bounds(p) {
            self.tiles[self.index(p)]
        } else {
            TileKind::Impassable
        }
    }

    pub fn has_holes(&self) -> bool {
        self.tiles.contains(&TileKind::Hole)
    }

    /// Map reflected across the horizontal mid-line (`y -> H-1-y`).
    pub fn reflected(&self) -> GridMap {
        let mut tiles = Vec::with_capacity(self.tiles.len());
        for y in (0..self.height).rev() {
            for x in 0..self.width {
                tiles.push(self.tiles[(y * self.width + x) as usize]);
            }
        }
        GridMap {
            width: self.width,
            height: self.height,
            tiles,
        }
    }

    pub fn reflect_pos(&self, p: Pos) -> Pos {
        Pos::new(p.x, self.height - 1 - p.y)
    }

    /// Tiles reachable from `origin` in at most `range` king steps, walking only
    /// over walkable tiles for which `blocked` is false. The origin is excluded.
    /// Result is sorted row-major.
    pub fn reachable(&self, origin: Pos, range: u32, blocked: impl Fn(Pos) -> bool) -> Vec<Pos> {
        let mut out = Vec::new();
        if range == 0 {
            return out;
        }
        if range == 1 {
            // neighbours already come in row-major order
            out.extend(
                origin
                    .neighbours()
                    .filter(|&n| self.tile(n).is_walkable() && !blocked(n)),
            );
            return out;
        }
        // distances are kept for the bounding window of the range only
        let r = range.min(self.width.max(self.height) as u32) as i32;
        let x0 = (origin.x - r).max(0);
        let y0 = (origin.y - r).max(0);
        let w = ((origin.x + r).min(self.width - 1) - x0 + 1) as usize;
        let h = ((origin.y + r).min(self.height - 1) - y0 + 1) as usize;
        let slot = |p: Pos| (p.y - y0) as usize * w + (p.x - x0) as usize;
        let mut dist = vec![u32::MAX; w * h];
        dist[slot(origin)] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(origin);
        while let Some(p) = queue.pop_front() {
            let d = dist[slot(p)];
            if d == range {
                continue;
            }
            for n in p.neighbours() {
                if !self.in_bounds(n) {
                    continue;
                }
                let i = slot(n);
                if dist[i] != u32::MAX || !self.tile(n).is_walkable() || blocked(n) {
                    continue;
                }
                dist[i] = d + 1;
                out.push(n);
                queue.push_back(n);
            }
        }
        out.sort();
        out
    }

    /// King-step distance from every tile to `goal` over walkable, unblocked
    /// tiles, indexed like the tile array. `goal` itself is always reachable;
    /// unreachable tiles hold `None`.
    pub fn distance_field(&self, goal: Pos, blocked: impl Fn(Pos) -> bool) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.tiles.len()];
        if !self.in_bounds(goal) {
            return dist;
        }
        dist[self.index(goal)] = Some(0);
        let mut queue = VecDeque::new();
        queue.push_back(goal);
        while let Some(p) = queue.pop_front() {
            let d = dist[self.index(p)].expect("queued tiles have a distance");
            for n in p.neighbours() {
                if !self.in_bounds(n) {
                    continue;
                }
                let i = self.index(n);
                if dist[i].is_some() || !self.tiles[i].is_walkable() || blocked(n) {
                    continue;
                }
                dist[i] = Some(d + 1);
                queue.push_back(n);
            }
        }
        dist
    }

    /// Breadth-first shortest path (king moves) from `from` to `to` over walkable,
    /// unblocked tiles. `to` itself must be walkable and unblocked. Returns the
    /// path excluding `from` and including `to`; empty when `from == to`.
    pub fn shortest_path(&self, from: Pos, to: Pos, blocked: impl Fn(Pos) -> bool) -> Option<Vec<Pos>> {
        if from == to {
            return Some(Vec::new());
        }
        let mut prev = vec![usize::MAX; self.tiles.len()];
        let start = self.index(from);
        prev[start] = start;
        let mut queue = VecDeque::new();
        queue.push_back(from);
        while let Some(p) = queue.pop_front() {
            for n in p.neighbours() {
                if !self.in_bounds(n) {
                    continue;
                }
                let i = self.index(n);
                if prev[i] != usize::MAX || !self.tiles[i].is_walkable() || blocked(n) {
                    continue;
                }
                prev[i] = self.index(p);
                if n == to {
                    let mut path = vec![n];
                    let mut cur = self.index(p);
                    while cur != start {
                        path.push(self.pos_of(cur));
                        cur = prev[cur];
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(n);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open(w: i32, h: i32) -> GridMap {
        GridMap::new(w, h, vec![TileKind::Plain; (w * h) as usize]).unwrap()
    }

    #[test]
    fn distance_field_goes_around_walls() {
        let m = GridMap::from_rows(&[".#.", ".#.", "..."]).unwrap();
        let d = m.distance_field(Pos::new(2, 0), |_| false);
        assert_eq!(d[m.index(Pos::new(0, 0))], Some(4));
        assert_eq!(d[m.index(Pos::new(1, 0))], None);
        assert_eq!(d[m.index(Pos::new(2, 0))], Some(0));
    }

    #[test]
    fn chebyshev_distance() {
        assert_eq!(Pos::new(0, 0).distance(Pos::new(3, 1)), 3);
        assert_eq!(Pos::new(2, 2).distance(Pos::new(1, 1)), 1);
        assert_eq!(Pos::new(4, 4).distance(Pos::new(4, 4)), 0);
    }

    #[test]
    fn row_major_order() {
        let mut v = vec![Pos::new(1, 1), Pos::new(0, 2), Pos::new(2, 0)];
        v.sort();
        assert_eq!(v, vec![Pos::new(2, 0), Pos::new(1, 1), Pos::new(0, 2)]);
    }

    #[test]
    fn reachable_center_of_3x3() {
        let map = open(3, 3);
        assert_eq!(map.reachable(Pos::new(1, 1), 1, |_| false).len(), 8);
    }

    #[test]
    fn walls_block_reachability() {
        let map = GridMap::from_rows(&["...", "###", "..."]).unwrap();
        assert!(map.reachable(Pos::new(0, 0), 5, |_| false).iter().all(|p| p.y == 0));
    }

    #[test]
    fn shortest_path_goes_around_obstacles() {
        let map = GridMap::from_rows(&["....", ".##.", "...."]).unwrap();
        let path = map.shortest_path(Pos::new(0, 0), Pos::new(3, 2), |_| false).unwrap();
        assert_eq!(path.last(), Some(&Pos::new(3, 2)));
        assert_eq!(path.len(), 4);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(GridMap::from_rows(&["..", "."]).is_err());
        assert!(GridMap::from_rows(&["..", ".x"]).is_err());
        assert!(GridMap::from_rows(&[".."]).is_err());
    }

    #[test]
    fn rows_round_trip() {
        let rows = vec!["O..#".to_string(), "....".to_string()];
        assert_eq!(GridMap::from_rows(&rows).unwrap().to_rows(), rows);
    }
}
