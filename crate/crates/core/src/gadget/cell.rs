//! Multi-track tape cells used by compiled gadget machines.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    /// Holds an input letter on track 1.
    Input,
    /// Lies to the right of the input; track 1 is blank.
    Beyond,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mark {
    None,
    X,
    Y,
}

/// Position of a cell relative to the counter window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Win {
    Out,
    In,
    Last,
}

/// One tape square: input track, origin flag, sieve track and the window tracks.
///
/// `digits` holds one bit per layout track; the window stores numbers with
/// the least significant digit in its leftmost cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub kind: Kind,
    pub origin: bool,
    pub mark: Mark,
    pub win: Win,
    pub digits: u8,
}

impl Cell {
    pub const PRISTINE: Cell = Cell {
        kind: Kind::Input,
        origin: false,
        mark: Mark::None,
        win: Win::Out,
        digits: 0,
    };

    /// The cell a blank square turns into once written.
    pub const BEYOND: Cell = Cell {
        kind: Kind::Beyond,
        origin: false,
        mark: Mark::None,
        win: Win::Out,
        digits: 0,
    };

    pub fn in_window(self) -> bool {
        self.win != Win::Out
    }

    pub fn with(self, win: Win, digits: u8) -> Cell {
        Cell { win, digits, ..self }
    }

    pub fn bit(self, track: u8) -> bool {
        self.digits >> track & 1 == 1
    }

    /// Symbol name: kind letter, `^` for the origin, mark, window flag, digits.
    pub fn name(self, width: usize) -> String {
        let mut s = String::new();
        s.push(match self.kind {
            Kind::Input => 'a',
            Kind::Beyond => 'e',
        });
        if self.origin {
            s.push('^');
        }
        match self.mark {
            Mark::None => {}
            Mark::X => s.push('x'),
            Mark::Y => s.push('y'),
        }
        match self.win {
            Win::Out => {}
            Win::In => s.push('w'),
            Win::Last => s.push('W'),
        }
        if self.win != Win::Out || self.digits != 0 {
            s.push(':');
            for t in 0..width {
                let _ = write!(s, "{}", self.digits >> t & 1);
            }
        }
        s
    }
}

/// Blank squares read as `None`.
pub fn kind_of(read: Option<Cell>) -> Kind {
    read.map_or(Kind::Beyond, |c| c.kind)
}
