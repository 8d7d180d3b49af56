//! Solver-neutral representation of the integer program.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Binary,
    Integer,
}

/// Variable families, recognisable from the name prefix before `[`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarClass {
    X,
    Y,
    YDes,
    YMax,
    YAux,
    XBlk,
    YBlk,
    YBlkCons,
    XCons,
    VioRest,
    WeAtt,
    VioWePref,
    VioMaxWe,
    VioFreeWe,
    VioMaxD,
    VioMinD,
    VioMaxPhy,
    VioDown,
    VioUp,
    VioMaxConsB,
}

impl VarClass {
    pub const ALL: [VarClass; 20] = [
        VarClass::X,
        VarClass::Y,
        VarClass::YDes,
        VarClass::YMax,
        VarClass::YAux,
        VarClass::XBlk,
        VarClass::YBlk,
        VarClass::YBlkCons,
        VarClass::XCons,
        VarClass::VioRest,
        VarClass::WeAtt,
        VarClass::VioWePref,
        VarClass::VioMaxWe,
        VarClass::VioFreeWe,
        VarClass::VioMaxD,
        VarClass::VioMinD,
        VarClass::VioMaxPhy,
        VarClass::VioDown,
        VarClass::VioUp,
        VarClass::VioMaxConsB,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            VarClass::X => "x",
            VarClass::Y => "y",
            VarClass::YDes => "yDes",
            VarClass::YMax => "yMax",
            VarClass::YAux => "yAux",
            VarClass::XBlk => "xBlk",
            VarClass::YBlk => "yBlk",
            VarClass::YBlkCons => "yBlkCons",
            VarClass::XCons => "xCons",
            VarClass::VioRest => "vioRest",
            VarClass::WeAtt => "weAtt",
            VarClass::VioWePref => "vioWePref",
            VarClass::VioMaxWe => "vioMaxWe",
            VarClass::VioFreeWe => "vioFreeWe",
            VarClass::VioMaxD => "vioMaxD",
            VarClass::VioMinD => "vioMinD",
            VarClass::VioMaxPhy => "vioMaxPhy",
            VarClass::VioDown => "vioDown",
            VarClass::VioUp => "vioUp",
            VarClass::VioMaxConsB => "vioMaxConsB",
        }
    }

    pub fn of_name(name: &str) -> Option<VarClass> {
        let prefix = name.split('[').next()?;
        VarClass::ALL.into_iter().find(|c| c.prefix() == prefix)
    }

    /// Assignment variables; every other variable follows from these.
    pub fn is_decision(self) -> bool {
        matches!(self, VarClass::X | VarClass::Y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

impl Variable {
    pub fn class(&self) -> Option<VarClass> {
        VarClass::of_name(&self.name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Sense::Le => lhs <= rhs + tol,
            Sense::Ge => lhs >= rhs - tol,
            Sense::Eq => (lhs - rhs).abs() <= tol,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

/// Constraint family tag: number plus optional sub-part, e.g. `15.2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Family {
    pub number: u8,
    pub part: u8,
}

impl Family {
    pub const fn new(number: u8, part: u8) -> Self {
        Self { number, part }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let (n, p) = match s.split_once('.') {
            Some((n, p)) => (n.parse().ok()?, p.parse().ok()?),
            None => (s.parse().ok()?, 0),
        };
        Some(Self { number: n, part: p })
    }

    /// Families whose constraints carry no violation variable.
    pub fn is_hard(self) -> bool {
        !matches!(
            self.number,
            8 | 9 | 10 | 11 | 16 | 25 | 26 | 27 | 30 | 32 | 34 | 35 | 36 | 37 | 39 | 40 | 42 | 44
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.part == 0 {
            write!(f, "{}", self.number)
        } else {
            write!(f, "{}.{}", self.number, self.part)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    /// `c{family}[subjects]`; the family is recoverable from the name.
    pub name: String,
    pub family: Family,
    /// Sorted by variable index, no duplicates, no zeros.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn family_of_name(name: &str) -> Option<Family> {
        let tag = name.strip_prefix('c')?.split('[').next()?;
        Family::parse(tag)
    }

    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * values[j]).sum()
    }
}

/// Maximisation problem over integer variables.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CanonicalModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
}

impl CanonicalModel {
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.variables.iter().zip(values).map(|(v, x)| v.objective * x).sum()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// First constraint or bound violated by `values`, if any.
    pub fn first_violation(&self, values: &[f64], tol: f64) -> Option<String> {
        for (v, &x) in self.variables.iter().zip(values) {
            if x < v.lower - tol || x > v.upper + tol || (x - x.round()).abs() > tol {
                return Some(format!("{} = {x} outside [{}, {}]", v.name, v.lower, v.upper));
            }
        }
        self.constraints
            .iter()
            .find(|c| !c.sense.holds(c.activity(values), c.rhs, tol))
            .map(|c| format!("{}: {} {} {}", c.name, c.activity(values), c.sense.symbol(), c.rhs))
    }
}
