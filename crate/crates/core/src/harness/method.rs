use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::freq_oracle::Mechanism;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodKind {
    Flat,
    Hierarchical { branching: usize },
    Consistent { branching: usize },
    Haar,
}

/// A range-query method and its frequency oracle. Written as `flat`,
/// `hh:B`, `hh_c:B` or `haar`, optionally followed by `:oue`, `:olh` or
/// `:hrr` (the Haar method only accepts `:hrr`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MethodSpec {
    pub kind: MethodKind,
    pub oracle: Mechanism,
}

impl MethodSpec {
    pub fn flat(oracle: Mechanism) -> Self {
        Self { kind: MethodKind::Flat, oracle }
    }

    pub fn hierarchical(branching: usize, oracle: Mechanism) -> Self {
        Self { kind: MethodKind::Hierarchical { branching }, oracle }
    }

    pub fn consistent(branching: usize, oracle: Mechanism) -> Self {
        Self { kind: MethodKind::Consistent { branching }, oracle }
    }

    pub fn haar() -> Self {
        Self { kind: MethodKind::Haar, oracle: Mechanism::Hrr }
    }

    pub fn branching(&self) -> Option<usize> {
        match self.kind {
            MethodKind::Hierarchical { branching } | MethodKind::Consistent { branching } => {
                Some(branching)
            }
            MethodKind::Flat | MethodKind::Haar => None,
        }
    }

    fn default_oracle(&self) -> Mechanism {
        match self.kind {
            MethodKind::Haar => Mechanism::Hrr,
            _ => Mechanism::Oue,
        }
    }

    /// Stable label used to derive this method's random stream. Raw and
    /// consistent hierarchies with the same `B` and oracle share a label, so
    /// they post-process the same noisy tree.
    pub(crate) fn stream_label(&self) -> [u64; 3] {
        let oracle = match self.oracle {
            Mechanism::Oue => 0,
            Mechanism::Olh => 1,
            Mechanism::Hrr => 2,
        };
        match self.kind {
            MethodKind::Flat => [1, 0, oracle],
            MethodKind::Hierarchical { branching } | MethodKind::Consistent { branching } => {
                [2, branching as u64, oracle]
            }
            MethodKind::Haar => [3, 0, oracle],
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MethodKind::Flat => write!(f, "flat")?,
            MethodKind::Hierarchical { branching } => write!(f, "hh:{branching}")?,
            MethodKind::Consistent { branching } => write!(f, "hh_c:{branching}")?,
            MethodKind::Haar => write!(f, "haar")?,
        }
        if self.oracle != self.default_oracle() {
            write!(f, ":{}", self.oracle.name())?;
        }
        Ok(())
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let parse_b = |text: Option<&&str>| -> Result<usize> {
            let text = text.ok_or_else(|| Error::Domain(format!("`{s}` needs a branching factor")))?;
            let b: usize = text
                .parse()
                .map_err(|_| Error::Domain(format!("bad branching factor `{text}` in `{s}`")))?;
            if b < 2 {
                return domain(format!("branching factor must be at least 2 in `{s}`"));
            }
            Ok(b)
        };
        let (mut spec, rest) = match parts[0].to_ascii_lowercase().as_str() {
            "flat" => (MethodSpec::flat(Mechanism::Oue), &parts[1..]),
            "hh" => (MethodSpec::hierarchical(parse_b(parts.get(1))?, Mechanism::Oue), &parts[2..]),
            "hh_c" => (MethodSpec::consistent(parse_b(parts.get(1))?, Mechanism::Oue), &parts[2..]),
            "haar" => (MethodSpec::haar(), &parts[1..]),
            other => return domain(format!("unknown method `{other}`")),
        };
        match rest {
            [] => {}
            [oracle] => spec.oracle = oracle.parse()?,
            _ => return domain(format!("too many fields in method `{s}`")),
        }
        if spec.kind == MethodKind::Haar && spec.oracle != Mechanism::Hrr {
            return domain("the Haar method always uses HRR");
        }
        Ok(spec)
    }
}
