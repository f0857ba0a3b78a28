//! Plain-text formats: set files, Bohr descriptors, policy files and function dumps.

use std::fmt::Write as _;
use std::path::Path;

use aplab_core::{BohrSet, GroupFunction, Policy, SetOnZN};

use crate::error::{io_err, Error, Result};

/// `(line number, key, value)` for every `key=value` line; blank lines and `#` comments are skipped.
pub fn key_values(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected key=value, got {line:?}") })?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub(crate) fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Parse { line, msg: format!("bad value {value:?} for {key}") })
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(io_err(path))
}

/// Parses `N=<modulus>` followed by one ascending residue per line.
pub fn parse_set(text: &str) -> Result<SetOnZN> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty set file".into() })?;
    let n: usize = match head.trim().split_once('=') {
        Some(("N", v)) => parse_num(1, "N", v.trim())?,
        _ => return Err(Error::Parse { line: 1, msg: "first line must be N=<modulus>".into() }),
    };
    let mut residues = Vec::new();
    let mut last: Option<u64> = None;
    for (i, l) in lines {
        let x: u64 = parse_num(i + 1, "residue", l.trim())?;
        if last.is_some_and(|p| x <= p) {
            return Err(Error::Parse { line: i + 1, msg: "residues must be strictly ascending".into() });
        }
        last = Some(x);
        residues.push(x);
    }
    Ok(SetOnZN::from_residues(n, residues)?)
}

pub fn format_set(set: &SetOnZN) -> String {
    let mut s = format!("N={}\n", set.modulus());
    for x in set.iter() {
        writeln!(s, "{x}").unwrap();
    }
    s
}

pub fn read_set(path: &Path) -> Result<SetOnZN> {
    parse_set(&read_text(path)?)
}

/// Dumps a function as CSV `index,re,im`.
pub fn format_function(f: &GroupFunction) -> String {
    let mut s = String::from("index,re,im\n");
    for (i, v) in f.values().iter().enumerate() {
        writeln!(s, "{i},{:?},{:?}", v.re, v.im).unwrap();
    }
    s
}

/// A Bohr-set descriptor: `N=<int>`, `delta=<decimal>`, `gamma=<comma-separated residues>`.
#[derive(Debug, Clone, PartialEq)]
pub struct BohrDescriptor {
    pub modulus: usize,
    pub delta: f64,
    pub gamma: Vec<usize>,
}

impl BohrDescriptor {
    pub fn parse(text: &str) -> Result<Self> {
        let (mut n, mut delta, mut gamma) = (None, None, None);
        for (line, k, v) in key_values(text)? {
            match k.as_str() {
                "N" => n = Some(parse_num(line, &k, &v)?),
                "delta" => delta = Some(parse_num(line, &k, &v)?),
                "gamma" => {
                    let mut g = Vec::new();
                    for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                        g.push(parse_num(line, &k, part)?);
                    }
                    gamma = Some(g);
                }
                _ => return Err(Error::Parse { line, msg: format!("unknown key {k}") }),
            }
        }
        let missing = |what: &str| Error::Parse { line: 0, msg: format!("descriptor lacks {what}") };
        Ok(BohrDescriptor {
            modulus: n.ok_or_else(|| missing("N"))?,
            delta: delta.ok_or_else(|| missing("delta"))?,
            gamma: gamma.ok_or_else(|| missing("gamma"))?,
        })
    }

    pub fn format(&self) -> String {
        let gamma: Vec<String> = self.gamma.iter().map(|g| g.to_string()).collect();
        format!("N={}\ndelta={:?}\ngamma={}\n", self.modulus, self.delta, gamma.join(","))
    }

    pub fn build(&self) -> Result<BohrSet> {
        Ok(BohrSet::new(self.modulus, &self.gamma, self.delta)?)
    }
}

/// Reads a policy file; keys not mentioned keep their defaults.
pub fn parse_policy(text: &str) -> Result<Policy> {
    let mut policy = Policy::default();
    for (line, k, v) in key_values(text)? {
        apply_policy_key(&mut policy, line, &k, &v)?;
    }
    Ok(policy)
}

pub(crate) fn apply_policy_key(policy: &mut Policy, line: usize, key: &str, value: &str) -> Result<()> {
    let x: f64 = parse_num(line, key, value)?;
    if policy.set(key, x) {
        Ok(())
    } else if policy.get(key).is_none() {
        Err(Error::Parse { line, msg: format!("unknown policy key {key}") })
    } else {
        Err(Error::Parse { line, msg: format!("value {value} out of range for {key}") })
    }
}

pub fn format_policy(policy: &Policy) -> String {
    let mut s = String::new();
    for key in Policy::KEYS {
        writeln!(s, "{key}={:?}", policy.get(key).unwrap()).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_round_trip() {
        let s = SetOnZN::from_residues(10, [0, 3, 9]).unwrap();
        let text = format_set(&s);
        assert_eq!(text, "N=10\n0\n3\n9\n");
        assert_eq!(parse_set(&text).unwrap(), s);
    }

    #[test]
    fn set_rejects_disorder_and_range() {
        assert!(parse_set("N=10\n3\n1\n").is_err());
        assert!(parse_set("N=10\n3\n3\n").is_err());
        assert!(parse_set("N=10\n10\n").is_err());
        assert!(parse_set("3\n").is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let d = BohrDescriptor::parse("N=12\ndelta=0.6\ngamma=1\n").unwrap();
        assert_eq!(d.build().unwrap().members().to_vec(), [0, 1, 11]);
        assert_eq!(BohrDescriptor::parse(&d.format()).unwrap(), d);
        assert!(BohrDescriptor::parse("N=12\ndelta=0.6\n").is_err());
    }

    #[test]
    fn policy_round_trip() {
        let p = Policy { omega: 0.25, ..Policy::default() };
        assert_eq!(parse_policy(&format_policy(&p)).unwrap(), p);
        assert!(parse_policy("bogus=1").is_err());
        assert!(parse_policy("c_impl=2").is_err());
    }

    #[test]
    fn function_dump() {
        let f = GroupFunction::from_real(2, &[1.0, 0.5]).unwrap();
        assert_eq!(format_function(&f), "index,re,im\n0,1.0,0.0\n1,0.5,0.0\n");
    }
}
