use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

use super::quadrature::MAX_NODES;

pub const DEFAULT_NODES: usize = 12;
pub const DEFAULT_PRUNE: usize = 500;

/// Size of the pruned set: the `k` most uncertain sample points, or all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneSize {
    All,
    Top(usize),
}

impl Default for PruneSize {
    fn default() -> Self {
        PruneSize::Top(DEFAULT_PRUNE)
    }
}

impl fmt::Display for PruneSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PruneSize::All => write!(f, "all"),
            PruneSize::Top(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for PruneSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(PruneSize::All);
        }
        s.parse()
            .map(PruneSize::Top)
            .map_err(|_| Error::Config(format!("m0 must be a positive integer or \"all\", got {s:?}")))
    }
}

impl Serialize for PruneSize {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PruneSize::All => s.serialize_str("all"),
            PruneSize::Top(k) => s.serialize_u64(*k as u64),
        }
    }
}

impl<'de> Deserialize<'de> for PruneSize {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(k) => Ok(PruneSize::Top(k as usize)),
            Raw::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Which sums the pruned set restricts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PruneMode {
    /// Both the integrand sum and the candidate search.
    #[default]
    Both,
    CandidatesOnly,
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

/// Sampling criterion. Every criterion is exposed as "smaller is better".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Criterion {
    Sur {
        variant: u8,
        #[serde(default = "default_nodes")]
        q: usize,
        #[serde(default)]
        m0: PruneSize,
        #[serde(default)]
        prune_mode: PruneMode,
    },
    Timse {
        sigma_eps_sq: f64,
        #[serde(default)]
        m0: PruneSize,
        #[serde(default)]
        prune_mode: PruneMode,
    },
    Rb {
        kappa: f64,
        delta: u8,
    },
    Ech,
    Maximin,
}

impl Criterion {
    pub fn sur(variant: u8) -> Self {
        Criterion::Sur {
            variant,
            q: DEFAULT_NODES,
            m0: PruneSize::default(),
            prune_mode: PruneMode::Both,
        }
    }

    pub fn timse(sigma_eps_sq: f64) -> Self {
        Criterion::Timse {
            sigma_eps_sq,
            m0: PruneSize::default(),
            prune_mode: PruneMode::Both,
        }
    }

    pub fn with_m0(self, size: PruneSize) -> Self {
        match self {
            Criterion::Sur { variant, q, prune_mode, .. } => Criterion::Sur { variant, q, m0: size, prune_mode },
            Criterion::Timse { sigma_eps_sq, prune_mode, .. } => Criterion::Timse { sigma_eps_sq, m0: size, prune_mode },
            other => other,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match self {
            Criterion::Sur { variant, q, m0, .. } => {
                if !(1..=4).contains(variant) {
                    return bad(format!("SUR variant must be 1..=4, got {variant}"));
                }
                if *q == 0 || *q > MAX_NODES {
                    return bad(format!("q must be in 1..={MAX_NODES}, got {q}"));
                }
                check_m0(m0)
            }
            Criterion::Timse { sigma_eps_sq, m0, .. } => {
                if !(*sigma_eps_sq >= 0.0 && sigma_eps_sq.is_finite()) {
                    return bad(format!("sigma_eps_sq must be non-negative, got {sigma_eps_sq}"));
                }
                check_m0(m0)
            }
            Criterion::Rb { kappa, delta } => {
                if !(*kappa > 0.0 && kappa.is_finite()) {
                    return bad(format!("kappa must be positive, got {kappa}"));
                }
                if *delta != 1 && *delta != 2 {
                    return bad(format!("delta must be 1 or 2, got {delta}"));
                }
                Ok(())
            }
            Criterion::Ech | Criterion::Maximin => Ok(()),
        }
    }

    /// Short name, e.g. `sur1`, `timse`.
    pub fn name(&self) -> String {
        match self {
            Criterion::Sur { variant, .. } => format!("sur{variant}"),
            Criterion::Timse { .. } => "timse".into(),
            Criterion::Rb { .. } => "rb".into(),
            Criterion::Ech => "ech".into(),
            Criterion::Maximin => "maximin".into(),
        }
    }

    /// Parameter string, e.g. `q=12;m0=500`.
    pub fn params(&self) -> String {
        let mode = |m: &PruneMode| match m {
            PruneMode::Both => "",
            PruneMode::CandidatesOnly => ";prune=candidates",
        };
        match self {
            Criterion::Sur { q, m0, prune_mode, .. } => format!("q={q};m0={m0}{}", mode(prune_mode)),
            Criterion::Timse { sigma_eps_sq, m0, prune_mode } => {
                format!("sigma_eps_sq={sigma_eps_sq:?};m0={m0}{}", mode(prune_mode))
            }
            Criterion::Rb { kappa, delta } => format!("kappa={kappa:?};delta={delta}"),
            Criterion::Ech | Criterion::Maximin => String::new(),
        }
    }
}

fn check_m0(m0: &PruneSize) -> Result<()> {
    match m0 {
        PruneSize::Top(0) => Err(Error::Config("m0 must be at least 1".into())),
        _ => Ok(()),
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.params();
        if p.is_empty() {
            write!(f, "{}", self.name())
        } else {
            write!(f, "{}:{}", self.name(), p.replace(';', ","))
        }
    }
}

/// Parses `name[:key=value,...]`, e.g. `sur1`, `sur2:m0=10`,
/// `timse:sigma_eps_sq=1e-6`, `rb:kappa=2,delta=1`, `ech`, `maximin`.
impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = Vec::new();
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value in criterion {s:?}, got {part:?}")))?;
            kv.push((k.trim().to_string(), v.trim().to_string()));
        }
        let take = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone());
        let num = |key: &str, v: String| -> Result<f64> {
            v.parse().map_err(|_| Error::Config(format!("criterion parameter {key} is not a number: {v:?}")))
        };
        let known: &[&str] = match name {
            n if n.starts_with("sur") => &["q", "m0", "prune"],
            "timse" => &["sigma_eps_sq", "m0", "prune"],
            "rb" => &["kappa", "delta"],
            _ => &[],
        };
        if let Some((k, _)) = kv.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown parameter {k:?} for criterion {name:?}")));
        }
        let m0 = take("m0").map(|v| v.parse()).transpose()?.unwrap_or_default();
        let prune_mode = match take("prune").as_deref() {
            None | Some("both") => PruneMode::Both,
            Some("candidates") => PruneMode::CandidatesOnly,
            Some(o) => return Err(Error::Config(format!("prune must be both or candidates, got {o:?}"))),
        };
        let c = match name {
            "sur1" | "sur2" | "sur3" | "sur4" => Criterion::Sur {
                variant: name[3..].parse().expect("digit"),
                q: take("q").map(|v| num("q", v)).transpose()?.map_or(DEFAULT_NODES, |q| q as usize),
                m0,
                prune_mode,
            },
            "timse" => Criterion::Timse {
                sigma_eps_sq: num("sigma_eps_sq", take("sigma_eps_sq").unwrap_or_else(|| "1e-6".into()))?,
                m0,
                prune_mode,
            },
            "rb" => Criterion::Rb {
                kappa: num("kappa", take("kappa").unwrap_or_else(|| "2".into()))?,
                delta: num("delta", take("delta").unwrap_or_else(|| "1".into()))? as u8,
            },
            "ech" => Criterion::Ech,
            "maximin" => Criterion::Maximin,
            other => return Err(Error::Config(format!("unknown criterion {other:?}"))),
        };
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["sur1", "sur3:m0=10", "sur2:q=20,m0=all", "timse:sigma_eps_sq=0.1", "rb:kappa=0.5,delta=2", "ech", "maximin", "sur4:prune=candidates"] {
            let c: Criterion = s.parse().unwrap();
            let again: Criterion = c.to_string().parse().unwrap();
            assert_eq!(c, again, "{s}");
        }
        assert!("sur5".parse::<Criterion>().is_err());
        assert!("rb:kappa=-1".parse::<Criterion>().is_err());
        assert!("sur1:m0=0".parse::<Criterion>().is_err());
        assert!("sur1:foo=1".parse::<Criterion>().is_err());
    }

    #[test]
    fn toml_forms() {
        #[derive(Deserialize)]
        struct W {
            c: Criterion,
        }
        let w: W = toml::from_str("c = { kind = \"sur\", variant = 1, m0 = \"all\" }").unwrap();
        assert_eq!(w.c, Criterion::sur(1).with_m0(PruneSize::All));
        let w: W = toml::from_str("c = { kind = \"timse\", sigma_eps_sq = 1.0, m0 = 50 }").unwrap();
        assert_eq!(w.c, Criterion::timse(1.0).with_m0(PruneSize::Top(50)));
        let w: W = toml::from_str("c = { kind = \"ech\" }").unwrap();
        assert_eq!(w.c, Criterion::Ech);
    }
}
