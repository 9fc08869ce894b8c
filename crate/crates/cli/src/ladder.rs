//! `(N, M, s)` ladders, either listed explicitly or generated from one of the
//! table relations by the sample size `N`.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triple {
    pub n: usize,
    pub m: usize,
    pub s: usize,
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(N={}, M={}, s={})", self.n, self.m, self.s)
    }
}

/// Relations used as table headers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    /// `N = M = s`
    Equal,
    /// `N = M² = s`
    SquareMesh,
    /// `N = 2M = 2s`
    HalfMesh,
    /// `N = 2M² = 2s`
    HalfSquareMesh,
    /// `2N = M² = 2s`, so `s = N`
    DoubledSquareMesh,
    /// `2N = M² = s`, so `s = 2N`
    DoubledSquareMeshWide,
}

impl Relation {
    pub const ALL: [Relation; 6] = [
        Relation::Equal,
        Relation::SquareMesh,
        Relation::HalfMesh,
        Relation::HalfSquareMesh,
        Relation::DoubledSquareMesh,
        Relation::DoubledSquareMeshWide,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Relation::Equal => "N=M=s",
            Relation::SquareMesh => "N=M²=s",
            Relation::HalfMesh => "N=2M=2s",
            Relation::HalfSquareMesh => "N=2M²=2s",
            Relation::DoubledSquareMesh => "2N=M²=2s",
            Relation::DoubledSquareMeshWide => "2N=M²=s",
        }
    }

    /// The triple with sample size `n`, if the relation has an integer one.
    pub fn triple(self, n: usize) -> Result<Triple> {
        let half = || (n % 2 == 0).then_some(n / 2).ok_or_else(|| self.no_triple(n));
        let (m, s) = match self {
            Relation::Equal => (n, n),
            Relation::SquareMesh => (exact_sqrt(n).ok_or_else(|| self.no_triple(n))?, n),
            Relation::HalfMesh => (half()?, half()?),
            Relation::HalfSquareMesh => (exact_sqrt(half()?).ok_or_else(|| self.no_triple(n))?, half()?),
            Relation::DoubledSquareMesh => (exact_sqrt(2 * n).ok_or_else(|| self.no_triple(n))?, n),
            Relation::DoubledSquareMeshWide => (exact_sqrt(2 * n).ok_or_else(|| self.no_triple(n))?, 2 * n),
        };
        let t = Triple { n, m, s };
        debug_assert!(self.holds(&t));
        Ok(t)
    }

    pub fn holds(self, t: &Triple) -> bool {
        let (n, m, s) = (t.n, t.m, t.s);
        match self {
            Relation::Equal => n == m && m == s,
            Relation::SquareMesh => n == m * m && n == s,
            Relation::HalfMesh => n == 2 * m && n == 2 * s,
            Relation::HalfSquareMesh => n == 2 * m * m && n == 2 * s,
            Relation::DoubledSquareMesh => 2 * n == m * m && m * m == 2 * s,
            Relation::DoubledSquareMeshWide => 2 * n == m * m && m * m == s,
        }
    }

    fn no_triple(self, n: usize) -> anyhow::Error {
        anyhow!("N = {n} gives no integer triple for {}", self.label())
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Relation {
    type Err = anyhow::Error;

    /// Accepts the table spelling (`N=M²=s`) or `^2` in place of `²`;
    /// whitespace is ignored.
    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
            .replace("^2", "²");
        Relation::ALL.into_iter().find(|r| r.label() == norm).ok_or_else(|| {
            let names: Vec<_> = Relation::ALL.iter().map(|r| r.label()).collect();
            anyhow!("unknown ladder {s:?}; expected one of {}", names.join(", "))
        })
    }
}

fn exact_sqrt(x: usize) -> Option<usize> {
    let r = (x as f64).sqrt().round() as usize;
    (r * r == x).then_some(r)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ladder {
    Named { relation: Relation, n: Vec<usize> },
    Explicit(Vec<Triple>),
}

impl Ladder {
    pub fn triples(&self) -> Result<Vec<Triple>> {
        match self {
            Ladder::Named { relation, n } => n.iter().map(|&n| relation.triple(n)).collect(),
            Ladder::Explicit(t) => Ok(t.clone()),
        }
    }

    pub fn relation(&self) -> Option<Relation> {
        match self {
            Ladder::Named { relation, .. } => Some(*relation),
            Ladder::Explicit(_) => None,
        }
    }

    /// Fails if a generated triple breaks its relation.
    pub fn validate(&self) -> Result<()> {
        if let Ladder::Named { relation, .. } = self {
            for t in self.triples()? {
                if !relation.holds(&t) {
                    bail!("{t} violates {relation}");
                }
            }
        }
        Ok(())
    }
}
