//! Variables, literals, partial assignments and quantifier classes.

use std::fmt;

/// 1-based propositional variable index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

impl Var {
    /// 0-based index for array storage.
    pub fn idx(self) -> usize {
        debug_assert!(self.0 >= 1);
        (self.0 - 1) as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// Signed literal: a variable together with its polarity.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lit {
    var: Var,
    positive: bool,
}

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit { var, positive }
    }

    pub fn pos(var: Var) -> Lit {
        Lit::new(var, true)
    }

    pub fn neg(var: Var) -> Lit {
        Lit::new(var, false)
    }

    /// Interprets a nonzero DIMACS-style signed integer.
    pub fn from_dimacs(code: i64) -> Option<Lit> {
        if code == 0 || code.unsigned_abs() > u32::MAX as u64 {
            return None;
        }
        Some(Lit::new(Var(code.unsigned_abs() as u32), code > 0))
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    pub fn negated(self) -> Lit {
        Lit::new(self.var, !self.positive)
    }

    /// Truth value of the literal when its variable is assigned `v`.
    pub fn eval(self, v: bool) -> bool {
        v == self.positive
    }

    pub fn to_dimacs(self) -> i64 {
        let code = self.var.0 as i64;
        if self.positive {
            code
        } else {
            -code
        }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Quantifier class of a variable, and also the direction of a projection.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Quant {
    Max,
    Min,
}

/// Partial truth assignment over variables `1..=n`. Unassigned variables are
/// tracked explicitly so that evaluating a function on an insufficient
/// assignment is detectable.
#[derive(Clone, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn new(num_vars: u32) -> Assignment {
        Assignment { values: vec![None; num_vars as usize] }
    }

    /// Total assignment whose bit `i` (LSB first) gives the value of variable
    /// `i+1`. Used to enumerate assignments in binary counting order.
    pub fn from_bits(num_vars: u32, bits: u64) -> Assignment {
        let values = (0..num_vars).map(|i| Some(bits >> i & 1 == 1)).collect();
        Assignment { values }
    }

    /// Total assignment over `vars` drawn from the bits of `bits`, all other
    /// variables left unassigned.
    pub fn from_bits_over(num_vars: u32, vars: &[Var], bits: u64) -> Assignment {
        let mut a = Assignment::new(num_vars);
        for (i, &v) in vars.iter().enumerate() {
            a.set(v, bits >> i & 1 == 1);
        }
        a
    }

    pub fn num_vars(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(var.idx()).copied().flatten()
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.values[var.idx()] = Some(value);
    }

    pub fn unset(&mut self, var: Var) {
        self.values[var.idx()] = None;
    }

    pub fn is_total(&self) -> bool {
        self.values.iter().all(|v| v.is_some())
    }

    /// Overlays `other` on top of `self`; `other`'s assigned variables win.
    pub fn union(&self, other: &Assignment) -> Assignment {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| b.or(*a))
            .collect();
        Assignment { values }
    }

    pub fn assigned_vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_some())
            .map(|(i, _)| Var(i as u32 + 1))
    }

    /// Signed-literal rendering of the assigned variables, in index order.
    pub fn to_dimacs(&self) -> Vec<i64> {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| {
                v.map(|on| if on { i as i64 + 1 } else { -(i as i64 + 1) })
            })
            .collect()
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lits: Vec<String> =
            self.to_dimacs().iter().map(|l| l.to_string()).collect();
        write!(f, "[{}]", lits.join(" "))
    }
}
