//! Small shared types: Lebesgue exponents and multi-indices.

use crate::error::{domain, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

/// A Lebesgue exponent p ∈ [1, ∞].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            domain(format!("exponent must satisfy 1 <= p < inf, got {p}"))
        }
    }

    /// 1/p, with 1/∞ = 0.
    pub fn recip(&self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// Value as f64 with ∞ mapped to `f64::INFINITY`.
    pub fn value(&self) -> f64 {
        match self {
            Exponent::Finite(p) => *p,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Exponent::Infinity);
        }
        match t.parse::<f64>() {
            Ok(p) if p.is_infinite() && p > 0.0 => Ok(Exponent::Infinity),
            Ok(p) => Exponent::finite(p),
            Err(_) => domain(format!("cannot parse exponent {s:?}")),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::finite(p).map_err(serde::de::Error::custom),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A multi-index α ∈ ℕⁿ.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// (k, 0, …, 0) in dimension n.
    pub fn first_axis(n: usize, k: u32) -> Self {
        let mut v = vec![0; n];
        if n > 0 {
            v[0] = k;
        }
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// |α| = α_1 + … + α_n.
    pub fn order(&self) -> u64 {
        self.0.iter().map(|&a| a as u64).sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// All α in dimension n with |α| = k, in lexicographically decreasing order.
    pub fn with_order(n: usize, k: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        if n == 0 {
            if k == 0 {
                out.push(MultiIndex(vec![]));
            }
            return out;
        }
        let mut cur = vec![0u32; n];
        fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            let n = cur.len();
            if pos == n - 1 {
                cur[pos] = left;
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for v in (0..=left).rev() {
                cur[pos] = v;
                rec(pos + 1, left - v, cur, out);
            }
        }
        rec(0, k, &mut cur, &mut out);
        out
    }

    /// All α with |α| ≤ k, grouped by increasing order.
    pub fn up_to_order(n: usize, k: u32) -> Vec<MultiIndex> {
        (0..=k).flat_map(|j| Self::with_order(n, j)).collect()
    }

    /// All α with every entry ≤ m.
    pub fn bounded_entries(n: usize, m: u32) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex(vec![])];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|a| {
                    (0..=m).map(move |v| {
                        let mut e = a.0.clone();
                        e.push(v);
                        MultiIndex(e)
                    })
                })
                .collect();
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// Binomial coefficient as f64 (exact up to 2^53).
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_parsing() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("7.5".parse::<Exponent>().unwrap(), Exponent::Finite(7.5));
        assert!("0.5".parse::<Exponent>().is_err());
        assert!("abc".parse::<Exponent>().is_err());
        let js = serde_json_like(&Exponent::Infinity);
        assert_eq!(js, "inf");
    }

    fn serde_json_like(e: &Exponent) -> String {
        e.to_string()
    }

    #[test]
    fn index_enumeration_counts() {
        for n in 1..=4usize {
            for k in 0..=8u32 {
                let v = MultiIndex::with_order(n, k);
                assert_eq!(v.len() as f64, binomial(k as u64 + n as u64 - 1, n as u64 - 1));
                assert!(v.iter().all(|a| a.order() == k as u64 && a.dim() == n));
            }
        }
        assert_eq!(MultiIndex::bounded_entries(2, 8).len(), 81);
        assert_eq!(MultiIndex::up_to_order(2, 3).len(), 10);
    }

    #[test]
    fn binomial_small() {
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(binomial(52, 26), 495918532948104.0);
    }
}
