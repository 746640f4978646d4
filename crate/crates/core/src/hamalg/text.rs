//! Line format: a `# nlkg-hamiltonian ...` header with the metadata, then one
//! term per line as `re im | a:{n:e,...} b:{...} k:{...} k':{...}`.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::hamiltonian::{Form, Hamiltonian, Meta};
use super::monomial::Monomial;
use super::HamError;
use crate::indices::ExponentMap;

const MAGIC: &str = "# nlkg-hamiltonian";

pub fn write_hamiltonian(h: &Hamiltonian) -> String {
    let m = h.meta();
    let form = match h.form() {
        Form::Canonical => "canonical",
        Form::Expanded => "expanded",
    };
    let mut out = format!(
        "{MAGIC} form={form} sigma={:?} r={:?} c={:?} n_max={} d_max={}\n",
        m.sigma, m.r, m.c, m.n_max, m.d_max
    );
    for (mono, c) in h.iter() {
        writeln!(out, "{:e} {:e} | {mono}", c.re, c.im).unwrap();
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> HamError {
    HamError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line: &str) -> Result<(Meta, Form), HamError> {
    let rest = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| perr(1, format!("expected header starting with `{MAGIC}`")))?;
    let mut form = None;
    let (mut sigma, mut r, mut c, mut n_max, mut d_max) = (None, None, None, None, None);
    for field in rest.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| perr(1, format!("malformed header field `{field}`")))?;
        let float = || value.parse::<f64>().map_err(|_| perr(1, format!("bad number for {key}")));
        let int = || value.parse::<u32>().map_err(|_| perr(1, format!("bad integer for {key}")));
        match key {
            "form" => {
                form = Some(match value {
                    "canonical" => Form::Canonical,
                    "expanded" => Form::Expanded,
                    _ => return Err(perr(1, format!("unknown form `{value}`"))),
                })
            }
            "sigma" => sigma = Some(float()?),
            "r" => r = Some(float()?),
            "c" => c = Some(float()?),
            "n_max" => n_max = Some(int()?),
            "d_max" => d_max = Some(int()?),
            _ => return Err(perr(1, format!("unknown header field `{key}`"))),
        }
    }
    let need = |name: &str| perr(1, format!("header is missing `{name}`"));
    Ok((
        Meta {
            sigma: sigma.ok_or_else(|| need("sigma"))?,
            r: r.ok_or_else(|| need("r"))?,
            c: c.ok_or_else(|| need("c"))?,
            n_max: n_max.ok_or_else(|| need("n_max"))?,
            d_max: d_max.ok_or_else(|| need("d_max"))?,
        },
        form.ok_or_else(|| need("form"))?,
    ))
}

fn parse_map(token: &str, key: &str, line: usize) -> Result<ExponentMap, HamError> {
    let body = token
        .strip_prefix(key)
        .and_then(|t| t.strip_prefix(':'))
        .and_then(|t| t.strip_prefix('{'))
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| perr(line, format!("expected `{key}:{{...}}`, found `{token}`")))?;
    let mut map = ExponentMap::new();
    let mut last: Option<i32> = None;
    for entry in body.split(',').filter(|s| !s.is_empty()) {
        let (n, e) = entry
            .split_once(':')
            .ok_or_else(|| perr(line, format!("malformed entry `{entry}`")))?;
        let n: i32 = n.parse().map_err(|_| perr(line, format!("bad mode `{n}`")))?;
        let e: u32 = e.parse().map_err(|_| perr(line, format!("bad exponent `{e}`")))?;
        if e == 0 {
            return Err(perr(line, "zero exponents are not stored"));
        }
        if last.is_some_and(|l| l >= n) {
            return Err(perr(line, "modes must be strictly ascending"));
        }
        last = Some(n);
        map.add(n, e);
    }
    Ok(map)
}

pub fn parse_hamiltonian(text: &str) -> Result<Hamiltonian, HamError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    let (meta, form) = parse_header(header)?;
    let mut terms = Vec::new();
    for (i, raw) in lines.enumerate() {
        let line = i + 2;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let (nums, mono) = raw
            .split_once('|')
            .ok_or_else(|| perr(line, "expected `re im | ...`"))?;
        let mut parts = nums.split_whitespace();
        let mut num = |what: &str| -> Result<f64, HamError> {
            parts
                .next()
                .ok_or_else(|| perr(line, format!("missing {what} part")))?
                .parse::<f64>()
                .map_err(|_| perr(line, format!("bad {what} part")))
        };
        let coeff = Complex64::new(num("real")?, num("imaginary")?);
        let toks: Vec<&str> = mono.split_whitespace().collect();
        if toks.len() != 4 {
            return Err(perr(line, "expected four exponent maps a, b, k, k'"));
        }
        let m = Monomial::new(
            parse_map(toks[0], "a", line)?,
            parse_map(toks[1], "b", line)?,
            parse_map(toks[2], "k", line)?,
            parse_map(toks[3], "k'", line)?,
        );
        terms.push((m, coeff));
    }
    Hamiltonian::from_terms(meta, form, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_byte_identical() {
        let meta = Meta {
            sigma: 2.5,
            r: 1.25,
            c: 10.0,
            n_max: 3,
            d_max: 8,
        };
        let m1 = Monomial::new(
            ExponentMap::single(-1, 1),
            ExponentMap::single(2, 1),
            ExponentMap::from_pairs([(-3, 1), (1, 2)]),
            ExponentMap::single(-1, 1),
        );
        let m2 = Monomial::zz(ExponentMap::single(0, 2), ExponentMap::new());
        let h = Hamiltonian::from_terms(
            meta,
            Form::Canonical,
            [(m1, Complex64::new(1.0 / 3.0, -2e-17)), (m2, Complex64::new(4.7746e-307, 0.0))],
        )
        .unwrap();
        let s = write_hamiltonian(&h);
        let back = parse_hamiltonian(&s).unwrap();
        assert_eq!(back, h);
        assert_eq!(write_hamiltonian(&back), s);
    }

    #[test]
    fn parse_errors_carry_line() {
        let text = "# nlkg-hamiltonian form=canonical sigma=3.0 r=1.5 c=1.0 n_max=3 d_max=8\n\
                    1e0 0e0 | a:{} b:{} k:{2:1,1:1} k':{3:1}\n";
        match parse_hamiltonian(text) {
            Err(HamError::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_hamiltonian("hello"),
            Err(HamError::Parse { line: 1, .. })
        ));
    }
}
