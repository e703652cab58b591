//! Plain-text challenge files.
//!
//! ```text
//! n
//! m
//! q
//! alpha
//! b_1 b_2 ... b_m
//! a_1          (n values)
//! ...
//! a_m
//! ```
//!
//! Challenge files never carry the secret; it lives in a separate sidecar
//! (`<distribution>` on the first line, the `n` coordinates on the second).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{LweInstance, Secret, SecretDistribution};
use crate::error::{Error, Result};
use crate::params::{check_modulus, LweParams};
use crate::samples::Samples;

pub fn format_challenge(inst: &LweInstance) -> String {
    let p = &inst.params;
    let m = inst.samples.len();
    let mut out = String::with_capacity(m * (p.n + 1) * 5 + 64);
    let _ = writeln!(out, "{}\n{}\n{}\n{}", p.n, m, p.q, p.alpha);
    let bs: Vec<String> = inst.samples.iter().map(|s| s.b.to_string()).collect();
    out.push_str(&bs.join(" "));
    out.push('\n');
    for s in inst.samples.iter() {
        let mut first = true;
        for x in s.a {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{x}");
        }
        out.push('\n');
    }
    out
}

pub fn write_challenge(inst: &LweInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_challenge(inst)).map_err(|e| Error::io(path, e))
}

pub fn read_challenge(path: impl AsRef<Path>) -> Result<LweInstance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_challenge(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok((i + 1, l))
            }
            None => Err(Error::parse(
                self.last + 1,
                format!("unexpected end of file, expected {what}"),
            )),
        }
    }

    fn scalar<T: std::str::FromStr>(&mut self, what: &str) -> Result<(usize, T)> {
        let (no, line) = self.next_line(what)?;
        line.trim()
            .parse()
            .map(|v| (no, v))
            .map_err(|_| Error::parse(no, format!("expected {what}, got {:?}", line.trim())))
    }
}

fn residues(line: &str, no: usize, expected: usize, q: u32, out: &mut Vec<u16>) -> Result<()> {
    let start = out.len();
    for tok in line.split_whitespace() {
        let v: u32 = tok
            .parse()
            .map_err(|_| Error::parse(no, format!("invalid value {tok:?}")))?;
        if v >= q {
            return Err(Error::parse(no, format!("value {v} is not below q = {q}")));
        }
        out.push(v as u16);
    }
    let got = out.len() - start;
    if got != expected {
        return Err(Error::parse(
            no,
            format!("expected {expected} values, found {got}"),
        ));
    }
    Ok(())
}

pub fn parse_challenge(text: &str) -> Result<LweInstance> {
    let mut lines = Lines::new(text);
    let (n_line, n): (usize, usize) = lines.scalar("dimension n")?;
    if n == 0 {
        return Err(Error::parse(n_line, "n must be positive"));
    }
    let (m_line, m): (usize, usize) = lines.scalar("sample count m")?;
    if m == 0 {
        return Err(Error::parse(m_line, "m must be positive"));
    }
    let (q_line, q): (usize, u32) = lines.scalar("modulus q")?;
    check_modulus(q).map_err(|e| Error::parse(q_line, e.to_string()))?;
    let (a_line, alpha): (usize, f64) = lines.scalar("alpha")?;
    let params = LweParams::new(n, q, alpha).map_err(|e| Error::parse(a_line, e.to_string()))?;

    let (b_line, line) = lines.next_line("the b vector")?;
    let mut bs = Vec::with_capacity(m);
    residues(line, b_line, m, q, &mut bs)?;

    let mut samples = Samples::with_capacity(n, m);
    let mut a = Vec::with_capacity(n);
    for &b in &bs {
        let (no, line) = lines.next_line("a row of A")?;
        a.clear();
        residues(line, no, n, q, &mut a)?;
        samples.push(&a, b);
    }
    for (i, rest) in lines.inner {
        if !rest.trim().is_empty() {
            return Err(Error::parse(i + 1, "unexpected trailing data"));
        }
    }

    Ok(LweInstance {
        params,
        samples,
        secret: None,
    })
}

pub fn format_secret(secret: &Secret) -> String {
    let vals: Vec<String> = secret.s.iter().map(|x| x.to_string()).collect();
    format!("{}\n{}\n", secret.distribution, vals.join(" "))
}

pub fn write_secret(secret: &Secret, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_secret(secret)).map_err(|e| Error::io(path, e))
}

/// Parses a secret sidecar; values must be canonical modulo `q`.
pub fn parse_secret(text: &str, q: u32) -> Result<Secret> {
    let mut lines = Lines::new(text);
    let (no, tag) = lines.next_line("secret distribution")?;
    let distribution: SecretDistribution = tag
        .parse()
        .map_err(|e: Error| Error::parse(no, e.to_string()))?;
    let (no, line) = lines.next_line("secret coordinates")?;
    let mut s = Vec::new();
    let count = line.split_whitespace().count();
    residues(line, no, count, q, &mut s)?;
    if s.is_empty() {
        return Err(Error::parse(no, "empty secret"));
    }
    Ok(Secret { s, distribution })
}

pub fn read_secret(path: impl AsRef<Path>, q: u32) -> Result<Secret> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_secret(&text, q)
}
