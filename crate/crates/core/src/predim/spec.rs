use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A predimension preset together with the names it binds.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PredimensionSpec {
    /// `|X| − r(X)`
    TrivialR,
    /// `d(X) − r(X)`
    FieldR { d: String },
    /// `d(X ∪ f(X)) − |X|`, with `exclude` deleted from `X` first.
    FieldF {
        d: String,
        f: String,
        exclude: Vec<String>,
    },
    /// `d1(X ∪ f(X)) − d2(X)`
    Exp { d1: String, d2: String, f: String },
    /// `min over I ⊆ F of d(X ∪ ⋃_{i∈I} f_i(X)) − |X|·|I|`
    MultiF { d: String, fs: Vec<String> },
    /// `d(X ∪ g(X)) − d(X)`
    Aut { d: String, g: String },
    /// `d1(X) + d2(f(X)) − |X|` on sort-D sets, `f` the cross-sort bijection.
    Fusion { d1: String, d2: String },
}

impl PredimensionSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::TrivialR => "trivial_r",
            Self::FieldR { .. } => "field_r",
            Self::FieldF { .. } => "field_f",
            Self::Exp { .. } => "exp",
            Self::MultiF { .. } => "multi_f",
            Self::Aut { .. } => "aut",
            Self::Fusion { .. } => "fusion",
        }
    }
}

impl FromStr for PredimensionSpec {
    type Err = Error;

    /// Grammar: `trivial_r | field_r:d | field_f:d,f[/x+y] | exp:d1,d2,f |
    /// multi_f:d,f1+f2 | aut:d,g | fusion:d1,d2`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::input("--spec", format!("{m} in '{s}'"));
        let (head, args) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), a.trim()),
            None => (s.trim(), ""),
        };
        let parts: Vec<String> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',').map(|p| p.trim().to_string()).collect()
        };
        if parts.iter().any(|p| p.is_empty()) {
            return Err(bad("empty binding name"));
        }
        let want = |k: usize| {
            if parts.len() == k {
                Ok(())
            } else {
                Err(bad(&format!("expected {k} bindings")))
            }
        };
        Ok(match head {
            "trivial_r" => {
                want(0)?;
                Self::TrivialR
            }
            "field_r" => {
                want(1)?;
                Self::FieldR { d: parts[0].clone() }
            }
            "field_f" => {
                want(2)?;
                let (f, exclude) = match parts[1].split_once('/') {
                    Some((f, ex)) => (
                        f.to_string(),
                        ex.split('+').map(str::to_string).collect::<Vec<_>>(),
                    ),
                    None => (parts[1].clone(), Vec::new()),
                };
                if f.is_empty() || exclude.iter().any(String::is_empty) {
                    return Err(bad("malformed exclusion list"));
                }
                Self::FieldF {
                    d: parts[0].clone(),
                    f,
                    exclude,
                }
            }
            "exp" => {
                want(3)?;
                Self::Exp {
                    d1: parts[0].clone(),
                    d2: parts[1].clone(),
                    f: parts[2].clone(),
                }
            }
            "multi_f" => {
                want(2)?;
                let fs: Vec<String> = parts[1].split('+').map(str::to_string).collect();
                if fs.iter().any(String::is_empty) {
                    return Err(bad("empty function name"));
                }
                Self::MultiF {
                    d: parts[0].clone(),
                    fs,
                }
            }
            "aut" => {
                want(2)?;
                Self::Aut {
                    d: parts[0].clone(),
                    g: parts[1].clone(),
                }
            }
            "fusion" => {
                want(2)?;
                Self::Fusion {
                    d1: parts[0].clone(),
                    d2: parts[1].clone(),
                }
            }
            _ => return Err(bad("unknown preset")),
        })
    }
}

impl fmt::Display for PredimensionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TrivialR => write!(f, "trivial_r"),
            Self::FieldR { d } => write!(f, "field_r:{d}"),
            Self::FieldF { d, f: func, exclude } if exclude.is_empty() => {
                write!(f, "field_f:{d},{func}")
            }
            Self::FieldF { d, f: func, exclude } => {
                write!(f, "field_f:{d},{func}/{}", exclude.join("+"))
            }
            Self::Exp { d1, d2, f: func } => write!(f, "exp:{d1},{d2},{func}"),
            Self::MultiF { d, fs } => write!(f, "multi_f:{d},{}", fs.join("+")),
            Self::Aut { d, g } => write!(f, "aut:{d},{g}"),
            Self::Fusion { d1, d2 } => write!(f, "fusion:{d1},{d2}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_display_round_trip() {
        for s in [
            "trivial_r",
            "field_r:d",
            "field_f:d,f",
            "field_f:d,f/z+w",
            "exp:d1,d2,f",
            "multi_f:d,f1+f2",
            "aut:d,g",
            "fusion:d1,d2",
        ] {
            let spec: PredimensionSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
    }

    #[test]
    fn parse_errors() {
        for s in ["", "nope", "field_r", "field_r:a,b", "exp:a,b", "multi_f:d,", "field_f:d,f/"] {
            assert!(s.parse::<PredimensionSpec>().is_err(), "{s}");
        }
    }
}
