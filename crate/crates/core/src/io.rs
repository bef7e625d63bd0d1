//! Text formats: the channel description file and the tradeoff-curve CSV.
//!
//! A channel file is a sequence of `[section]` blocks. Blank lines and text
//! after `#` are ignored. Probabilities are listed sparsely (omitted entries
//! are zero) and every probability section may be off from one by up to
//! `1e-6`, in which case it is renormalized.
//!
//! ```text
//! [alphabets]          # sizes; sr is optional and defaults to 1
//! x = 2
//! s = 4
//! st = 2
//! shat = 2
//! y = 2
//! z = 2
//!
//! [labels]             # optional, strictly increasing values per alphabet
//! st = 0 1
//!
//! [state_joint]        # s st sr prob   (s st prob without sr)
//! 0 0 0.1
//!
//! [channel_law]        # x s y z prob
//! 0 0 0 0 1
//! # or, for P(y,z|x,s) = P(y|x,s) P(z|x,s):
//! # [channel_law.y]    x s y prob
//! # [channel_law.z]    x s z prob
//!
//! [distortion]         # rule = hamming | quadratic-labels | table
//! rule = table
//! 0 1 1.0              # st shat value, omitted entries are zero
//!
//! [input_cost]         # optional
//! budget = 10
//! 1 4.0                # x value, omitted entries are zero
//! ```
//!
//! [`serialize`] writes numbers in shortest round-trip form, so
//! `parse(serialize(ch)) == ch` bit for bit.

use std::fmt::Write as _;

use crate::channel::{ChannelLaw, ChannelParts, Distortion, InputCost, IsacChannel};
use crate::prob::{normalize_in_place, Alphabet, CondKernel, JointPmf, RowIssue};
use crate::solver::{TradeoffCurve, TradeoffPoint};
use crate::{Error, Result};

/// Largest deviation of a probability section from one accepted by [`parse`].
pub const PARSE_PROB_TOL: f64 = 1e-6;

const SECTIONS: [&str; 8] = [
    "alphabets",
    "labels",
    "state_joint",
    "channel_law",
    "channel_law.y",
    "channel_law.z",
    "distortion",
    "input_cost",
];

const ALPHABETS: [&str; 7] = ["x", "s", "st", "shat", "sr", "y", "z"];

struct Section<'a> {
    line: usize,
    body: Vec<(usize, &'a str)>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn split_sections(doc: &str) -> Result<Vec<(&str, Section<'_>)>> {
    let mut out: Vec<(&str, Section<'_>)> = Vec::new();
    for (i, raw) in doc.lines().enumerate() {
        let line = i + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_err(line, format!("malformed section header '{text}'")))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(parse_err(line, format!("unknown section [{name}]")));
            }
            if out.iter().any(|(n, _)| *n == name) {
                return Err(parse_err(line, format!("duplicate section [{name}]")));
            }
            out.push((name, Section { line, body: Vec::new() }));
            continue;
        }
        match out.last_mut() {
            Some((_, s)) => s.body.push((line, text)),
            None => return Err(parse_err(line, "content before the first section header")),
        }
    }
    Ok(out)
}

fn key_value(line: usize, text: &str) -> Result<(&str, &str)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| parse_err(line, format!("expected 'key = value', found '{text}'")))?;
    Ok((k.trim(), v.trim()))
}

fn number(line: usize, field: &str, what: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("{what}: '{field}' is not a number")))
}

fn prob(line: usize, field: &str) -> Result<f64> {
    let p = number(line, field, "probability")?;
    if !(p.is_finite() && p >= 0.0) {
        return Err(parse_err(line, format!("probability {p} is negative or not finite")));
    }
    Ok(p)
}

fn index(line: usize, field: &str, name: &str, size: usize) -> Result<usize> {
    let i = field
        .parse::<usize>()
        .map_err(|_| parse_err(line, format!("{name} index '{field}' is not a nonnegative integer")))?;
    if i >= size {
        return Err(parse_err(line, format!("{name} index {i} out of range (|{name}| = {size})")));
    }
    Ok(i)
}

fn fields<'a>(line: usize, text: &'a str, expected: &[&str]) -> Result<Vec<&'a str>> {
    let f: Vec<&str> = text.split_whitespace().collect();
    if f.len() != expected.len() {
        return Err(parse_err(
            line,
            format!("expected {} fields ({}), found {}", expected.len(), expected.join(" "), f.len()),
        ));
    }
    Ok(f)
}

fn normalize_section(line: usize, what: &str, values: &mut [f64]) -> Result<()> {
    normalize_in_place(values, PARSE_PROB_TOL).map_err(|issue| match issue {
        RowIssue::Sum(sum) => parse_err(line, format!("{what} sums to {sum}")),
        RowIssue::Entry(v) => parse_err(line, format!("{what} has invalid entry {v}")),
    })
}

/// Sparse rows of a conditional kernel over `n_rows` conditioning events.
fn parse_kernel(
    section: &Section<'_>,
    what: &str,
    cond: &[(&str, usize)],
    outs: &[(&str, usize)],
    row_name: impl Fn(usize) -> String,
) -> Result<CondKernel> {
    let n_rows: usize = cond.iter().map(|c| c.1).product();
    let n_out: usize = outs.iter().map(|c| c.1).product();
    let names: Vec<&str> = cond.iter().chain(outs).map(|c| c.0).chain(["prob"]).collect();
    let mut rows: Vec<Vec<(usize, f64, usize)>> = vec![Vec::new(); n_rows];
    for &(line, text) in &section.body {
        let f = fields(line, text, &names)?;
        let flat = |dims: &[(&str, usize)], offset: usize| -> Result<usize> {
            dims.iter().enumerate().try_fold(0, |acc, (k, &(name, size))| {
                Ok(acc * size + index(line, f[offset + k], name, size)?)
            })
        };
        let r = flat(cond, 0)?;
        let c = flat(outs, cond.len())?;
        let p = prob(line, f[names.len() - 1])?;
        rows[r].push((c, p, line));
    }
    let mut b = CondKernel::builder(n_out);
    let mut dense = Vec::new();
    for (r, mut entries) in rows.into_iter().enumerate() {
        entries.sort_by_key(|e| e.0);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(parse_err(w[1].2, format!("duplicate entry for {} in [{what}]", row_name(r))));
        }
        let (Some(first), Some(last)) = (entries.first(), entries.last()) else {
            return Err(parse_err(section.line, format!("{} has no entries in [{what}]", row_name(r))));
        };
        let start = first.0;
        dense.clear();
        dense.resize(last.0 - start + 1, 0.0);
        for &(c, p, _) in &entries {
            dense[c - start] = p;
        }
        normalize_section(section.line, &format!("{} of [{what}]", row_name(r)), &mut dense)?;
        b.push_row(start, &dense, || row_name(r))?;
    }
    Ok(b.finish())
}

/// Parses and validates a channel description.
pub fn parse(doc: &str) -> Result<IsacChannel> {
    let sections = split_sections(doc)?;
    let get = |name: &str| sections.iter().find(|(n, _)| *n == name).map(|(_, s)| s);
    let require = |name: &str| get(name).ok_or_else(|| Error::MissingSection(name.into()));

    let alph = require("alphabets")?;
    let mut sizes: [Option<(usize, usize)>; 7] = [None; 7];
    for &(line, text) in &alph.body {
        let (k, v) = key_value(line, text)?;
        let slot = ALPHABETS
            .iter()
            .position(|a| *a == k)
            .ok_or_else(|| parse_err(line, format!("unknown alphabet '{k}'")))?;
        let n = v
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| parse_err(line, format!("alphabet size '{v}' must be a positive integer")))?;
        if sizes[slot].replace((n, line)).is_some() {
            return Err(parse_err(line, format!("alphabet '{k}' given twice")));
        }
    }
    let has_sr = sizes[4].is_some();
    let size_of = |name: &str| -> Result<usize> {
        let slot = ALPHABETS.iter().position(|a| *a == name).expect("known alphabet");
        match sizes[slot] {
            Some((n, _)) => Ok(n),
            None if name == "sr" => Ok(1),
            None => Err(parse_err(alph.line, format!("missing alphabet size '{name}'"))),
        }
    };
    let (nx, ns, nt, nsh, nr, ny, nz) = (
        size_of("x")?,
        size_of("s")?,
        size_of("st")?,
        size_of("shat")?,
        size_of("sr")?,
        size_of("y")?,
        size_of("z")?,
    );

    let mut labels: [Option<Vec<f64>>; 7] = Default::default();
    if let Some(sec) = get("labels") {
        for &(line, text) in &sec.body {
            let (k, v) = key_value(line, text)?;
            let slot = ALPHABETS
                .iter()
                .position(|a| *a == k)
                .ok_or_else(|| parse_err(line, format!("unknown alphabet '{k}'")))?;
            let vals = v
                .split_whitespace()
                .map(|f| number(line, f, "label"))
                .collect::<Result<Vec<_>>>()?;
            let want = size_of(k)?;
            if vals.len() != want {
                return Err(parse_err(line, format!("{} labels for alphabet '{k}' of size {want}", vals.len())));
            }
            if labels[slot].replace(vals).is_some() {
                return Err(parse_err(line, format!("labels for '{k}' given twice")));
            }
        }
    }
    let alphabet = |slot: usize, n: usize| -> Result<Alphabet> {
        match &labels[slot] {
            Some(l) => Alphabet::with_labels(l.clone()),
            None => Alphabet::new(n),
        }
    };

    let sj = require("state_joint")?;
    let mut joint = vec![0.0; ns * nt * nr];
    let mut seen = vec![0usize; ns * nt * nr];
    let names: &[&str] = if has_sr { &["s", "st", "sr", "prob"] } else { &["s", "st", "prob"] };
    for &(line, text) in &sj.body {
        let f = fields(line, text, names)?;
        let s = index(line, f[0], "s", ns)?;
        let t = index(line, f[1], "st", nt)?;
        let r = if has_sr { index(line, f[2], "sr", nr)? } else { 0 };
        let i = (s * nt + t) * nr + r;
        if seen[i] != 0 {
            return Err(parse_err(line, format!("duplicate state_joint entry (also line {})", seen[i])));
        }
        seen[i] = line;
        joint[i] = prob(line, f[names.len() - 1])?;
    }
    normalize_section(sj.line, "[state_joint]", &mut joint)?;

    let row_name = |r: usize| format!("(x={},s={})", r / ns, r % ns);
    let channel_law = match (get("channel_law"), get("channel_law.y"), get("channel_law.z")) {
        (Some(sec), None, None) => ChannelLaw::Joint(parse_kernel(
            sec,
            "channel_law",
            &[("x", nx), ("s", ns)],
            &[("y", ny), ("z", nz)],
            row_name,
        )?),
        (None, Some(ys), Some(zs)) => ChannelLaw::Separable {
            y: parse_kernel(ys, "channel_law.y", &[("x", nx), ("s", ns)], &[("y", ny)], row_name)?,
            z: parse_kernel(zs, "channel_law.z", &[("x", nx), ("s", ns)], &[("z", nz)], row_name)?,
        },
        (None, None, None) => return Err(Error::MissingSection("channel_law".into())),
        (Some(sec), _, _) => {
            return Err(parse_err(sec.line, "[channel_law] cannot be combined with [channel_law.y]/[channel_law.z]"))
        }
        (None, Some(_), None) => return Err(Error::MissingSection("channel_law.z".into())),
        (None, None, Some(_)) => return Err(Error::MissingSection("channel_law.y".into())),
    };

    let dsec = require("distortion")?;
    let mut rule = None;
    let mut table = vec![0.0; nt * nsh];
    let mut table_rows = Vec::new();
    for &(line, text) in &dsec.body {
        if text.contains('=') {
            let (k, v) = key_value(line, text)?;
            if k != "rule" {
                return Err(parse_err(line, format!("unknown distortion key '{k}'")));
            }
            if rule.replace((v, line)).is_some() {
                return Err(parse_err(line, "distortion rule given twice"));
            }
        } else {
            let f = fields(line, text, &["st", "shat", "value"])?;
            let t = index(line, f[0], "st", nt)?;
            let s = index(line, f[1], "shat", nsh)?;
            let v = number(line, f[2], "distortion")?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(parse_err(line, format!("distortion {v} is negative or not finite")));
            }
            table[t * nsh + s] = v;
            table_rows.push(line);
        }
    }
    let distortion = match rule {
        None => return Err(parse_err(dsec.line, "missing 'rule = ...' in [distortion]")),
        Some(("table", _)) => Distortion::Table(table),
        Some((name, line)) => {
            if let Some(&l) = table_rows.first() {
                return Err(parse_err(l, format!("table rows given with rule '{name}'")));
            }
            match name {
                "hamming" => Distortion::Hamming,
                "quadratic-labels" => Distortion::QuadraticLabels,
                other => return Err(parse_err(line, format!("unknown distortion rule '{other}'"))),
            }
        }
    };

    let input_cost = match get("input_cost") {
        None => None,
        Some(sec) => {
            let mut per_symbol = vec![0.0; nx];
            let mut budget = None;
            for &(line, text) in &sec.body {
                if text.contains('=') {
                    let (k, v) = key_value(line, text)?;
                    if k != "budget" {
                        return Err(parse_err(line, format!("unknown input_cost key '{k}'")));
                    }
                    budget = Some(number(line, v, "budget")?);
                } else {
                    let f = fields(line, text, &["x", "value"])?;
                    per_symbol[index(line, f[0], "x", nx)?] = number(line, f[1], "input cost")?;
                }
            }
            Some(InputCost { per_symbol, budget })
        }
    };

    ChannelParts {
        x: alphabet(0, nx)?,
        s: alphabet(1, ns)?,
        st: alphabet(2, nt)?,
        shat: alphabet(3, nsh)?,
        sr: alphabet(4, nr)?,
        y: alphabet(5, ny)?,
        z: alphabet(6, nz)?,
        state_joint: JointPmf::new(vec![ns, nt, nr], joint)?,
        channel_law,
        distortion,
        input_cost,
    }
    .validate()
}

/// Reads and parses a channel file.
pub fn read_channel_file(path: impl AsRef<std::path::Path>) -> Result<IsacChannel> {
    parse(&std::fs::read_to_string(path)?)
}

/// Shortest decimal that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn write_kernel(out: &mut String, k: &CondKernel, ns: usize, split: Option<usize>) {
    for i in 0..k.n_rows() {
        for (j, p) in k.row(i).iter() {
            if p == 0.0 {
                continue;
            }
            let cols = match split {
                Some(nz) => format!("{} {}", j / nz, j % nz),
                None => j.to_string(),
            };
            let _ = writeln!(out, "{} {} {cols} {}", i / ns, i % ns, num(p));
        }
    }
}

/// Canonical text form of a channel: sections in a fixed order, entries in
/// lexicographic index order, zero probabilities omitted.
pub fn serialize(ch: &IsacChannel) -> String {
    let p = ch.parts();
    let mut out = String::new();
    let alphabets = [&p.x, &p.s, &p.st, &p.shat, &p.sr, &p.y, &p.z];
    let has_sr = p.sr.size() != 1 || p.sr.labels().is_some();
    out.push_str("[alphabets]\n");
    for (name, a) in ALPHABETS.iter().zip(alphabets) {
        if *name != "sr" || has_sr {
            let _ = writeln!(out, "{name} = {}", a.size());
        }
    }
    if alphabets.iter().any(|a| a.labels().is_some()) {
        out.push_str("\n[labels]\n");
        for (name, a) in ALPHABETS.iter().zip(alphabets) {
            if let Some(l) = a.labels() {
                let vals: Vec<String> = l.iter().map(|&v| num(v)).collect();
                let _ = writeln!(out, "{name} = {}", vals.join(" "));
            }
        }
    }

    out.push_str(if has_sr {
        "\n[state_joint]\n# s st sr prob\n"
    } else {
        "\n[state_joint]\n# s st prob\n"
    });
    let dims = p.state_joint.dims();
    let (nt, nr) = (dims[1], dims[2]);
    for (i, &v) in p.state_joint.pmf().probs().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let (s, t, r) = (i / (nt * nr), (i / nr) % nt, i % nr);
        if has_sr {
            let _ = writeln!(out, "{s} {t} {r} {}", num(v));
        } else {
            let _ = writeln!(out, "{s} {t} {}", num(v));
        }
    }

    let ns = p.s.size();
    match &p.channel_law {
        ChannelLaw::Joint(k) => {
            out.push_str("\n[channel_law]\n# x s y z prob\n");
            write_kernel(&mut out, k, ns, Some(p.z.size()));
        }
        ChannelLaw::Separable { y, z } => {
            out.push_str("\n[channel_law.y]\n# x s y prob\n");
            write_kernel(&mut out, y, ns, None);
            out.push_str("\n[channel_law.z]\n# x s z prob\n");
            write_kernel(&mut out, z, ns, None);
        }
    }

    out.push_str("\n[distortion]\n");
    match &p.distortion {
        Distortion::Hamming => out.push_str("rule = hamming\n"),
        Distortion::QuadraticLabels => out.push_str("rule = quadratic-labels\n"),
        Distortion::Table(v) => {
            out.push_str("rule = table\n# st shat value\n");
            let nsh = p.shat.size();
            for (i, &d) in v.iter().enumerate() {
                if d != 0.0 {
                    let _ = writeln!(out, "{} {} {}", i / nsh, i % nsh, num(d));
                }
            }
        }
    }

    if let Some(cost) = &p.input_cost {
        out.push_str("\n[input_cost]\n");
        if let Some(b) = cost.budget {
            let _ = writeln!(out, "budget = {}", num(b));
        }
        for (x, &b) in cost.per_symbol.iter().enumerate() {
            if b != 0.0 {
                let _ = writeln!(out, "{x} {}", num(b));
            }
        }
    }
    out
}

/// Column names of the curve CSV.
pub const CURVE_HEADER: [&str; 8] = [
    "mu",
    "capacity_bits",
    "distortion",
    "avg_cost",
    "lambda",
    "converged",
    "outer_iters",
    "tsa",
];

/// One CSV row. Time-sharing rows leave `mu`, `avg_cost` and `lambda` empty.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub mu: Option<f64>,
    pub capacity_bits: f64,
    pub distortion: f64,
    pub avg_cost: Option<f64>,
    pub lambda: Option<f64>,
    pub converged: bool,
    pub outer_iters: usize,
    pub tsa: bool,
}

impl From<&TradeoffPoint> for CurveRow {
    fn from(p: &TradeoffPoint) -> Self {
        Self {
            mu: Some(p.mu),
            capacity_bits: p.capacity_bits,
            distortion: p.distortion,
            avg_cost: p.avg_cost,
            lambda: p.lambda_star,
            converged: p.converged,
            outer_iters: p.outer_iters,
            tsa: false,
        }
    }
}

/// Rows of a curve in file order: points by distortion (ties by `μ`), then
/// the two time-sharing endpoints.
pub fn curve_rows(curve: &TradeoffCurve) -> Vec<CurveRow> {
    let mut pts: Vec<&TradeoffPoint> = curve.points.iter().collect();
    pts.sort_by(|a, b| a.distortion.total_cmp(&b.distortion).then(b.mu.total_cmp(&a.mu)));
    let mut rows: Vec<CurveRow> = pts.into_iter().map(CurveRow::from).collect();
    for (c, d) in curve.tsa.endpoints() {
        rows.push(CurveRow {
            mu: None,
            capacity_bits: c,
            distortion: d,
            avg_cost: None,
            lambda: None,
            converged: true,
            outer_iters: 0,
            tsa: true,
        });
    }
    rows
}

/// Writes the curve CSV. Numbers use shortest round-trip decimals.
pub fn write_curve_csv<W: std::io::Write>(curve: &TradeoffCurve, dest: W) -> Result<()> {
    if curve.points.is_empty() {
        return Err(Error::InvalidConfig("cannot write an empty curve".into()));
    }
    let mut w = csv::Writer::from_writer(dest);
    w.write_record(CURVE_HEADER)?;
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    for r in curve_rows(curve) {
        w.write_record([
            opt(r.mu),
            num(r.capacity_bits),
            num(r.distortion),
            opt(r.avg_cost),
            opt(r.lambda),
            r.converged.to_string(),
            r.outer_iters.to_string(),
            r.tsa.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a curve CSV written by [`write_curve_csv`].
pub fn read_curve_csv<R: std::io::Read>(src: R) -> Result<Vec<CurveRow>> {
    let mut r = csv::Reader::from_reader(src);
    let header = r.headers()?.clone();
    if header.iter().ne(CURVE_HEADER) {
        return Err(parse_err(1, format!("unexpected CSV header '{}'", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let opt = |k: usize| -> Result<Option<f64>> {
            match &rec[k] {
                "" => Ok(None),
                f => number(line, f, CURVE_HEADER[k]).map(Some),
            }
        };
        let flag = |k: usize| -> Result<bool> {
            rec[k]
                .parse()
                .map_err(|_| parse_err(line, format!("{}: '{}' is not true/false", CURVE_HEADER[k], &rec[k])))
        };
        rows.push(CurveRow {
            mu: opt(0)?,
            capacity_bits: number(line, &rec[1], "capacity_bits")?,
            distortion: number(line, &rec[2], "distortion")?,
            avg_cost: opt(3)?,
            lambda: opt(4)?,
            converged: flag(5)?,
            outer_iters: rec[6]
                .parse()
                .map_err(|_| parse_err(line, format!("outer_iters: '{}' is not an integer", &rec[6])))?,
            tsa: flag(7)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::binary_example;
    use crate::Csir;

    const TINY: &str = "
[alphabets]
x = 2
s = 1
st = 1
shat = 1
y = 2
z = 1

[state_joint]
0 0 1

[channel_law]   # identity channel
0 0 0 0 1
1 0 1 0 1

[distortion]
rule = hamming
";

    #[test]
    fn binary_round_trip() {
        for csir in [Csir::None, Csir::Perfect] {
            let ch = binary_example(csir);
            let doc = serialize(&ch);
            assert_eq!(doc, serialize(&ch));
            let back = parse(&doc).unwrap();
            assert!(back == ch);
            assert_eq!(serialize(&back), doc);
        }
        let doc = serialize(&binary_example(Csir::None));
        for p in ["0.1", "0.2", "0.3", "0.4"] {
            assert!(doc.lines().any(|l| l.ends_with(&format!(" {p}"))), "{p} missing:\n{doc}");
        }
        assert!(!doc.contains("[labels]"));
        assert!(!doc.contains("sr ="));
    }

    #[test]
    fn tiny_document() {
        let ch = parse(TINY).unwrap();
        assert_eq!(ch.parts().sr.size(), 1);
        assert_eq!(ch.parts().x.size(), 2);
    }

    #[test]
    fn missing_sections_are_named() {
        let doc = TINY.replace("[channel_law]", "[channel_law.y]");
        assert!(matches!(parse(&doc), Err(Error::MissingSection(s)) if s == "channel_law.z"));
        let cut: String = TINY.lines().filter(|l| !l.starts_with("0 0 0 0") && !l.starts_with("1 0 1") && !l.starts_with("[channel_law")).collect::<Vec<_>>().join("\n");
        let err = parse(&cut).unwrap_err();
        assert!(matches!(&err, Error::MissingSection(s) if s == "channel_law"), "{err}");
        assert!(err.to_string().contains("channel_law"));
    }

    #[test]
    fn line_level_errors() {
        let bad = TINY.replace("1 0 1 0 1", "1 0 2 0 1");
        match parse(&bad) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 15);
                assert!(msg.contains("y index 2"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
        let bad = TINY.replace("0 0 1\n", "0 0 0.9\n");
        assert!(matches!(parse(&bad), Err(Error::Parse { line: 10, .. })));
        let bad = TINY.replace("rule = hamming", "rule = cosine");
        assert!(parse(&bad).is_err());
        let bad = TINY.replace("1 0 1 0 1", "1 0 1 0 1 7");
        assert!(parse(&bad).is_err());
    }

    #[test]
    fn small_deviations_are_renormalized() {
        let doc = TINY.replace("0 0 1\n", "0 0 1.0000005\n");
        let ch = parse(&doc).unwrap();
        assert_eq!(ch.parts().state_joint.pmf().probs(), &[1.0]);
    }

    #[test]
    fn sparse_and_dense_state_joint_agree() {
        let sparse = serialize(&binary_example(Csir::None));
        let mut dense = String::new();
        for line in sparse.lines() {
            dense.push_str(line);
            dense.push('\n');
            if line == "# s st prob" {
                // explicit zeros for the missing (s, s_T) pairs
                for (s, t) in [(0, 1), (1, 1), (2, 1), (3, 0)] {
                    dense.push_str(&format!("{s} {t} 0\n"));
                }
            }
        }
        assert!(parse(&dense).unwrap() == parse(&sparse).unwrap());
    }

    #[test]
    fn csv_header_and_round_trip() {
        use crate::estimator::optimal_estimator;
        use crate::solver::{sweep_mu, SolverConfig, TradeoffProblem};
        let ch = binary_example(Csir::Perfect);
        let est = optimal_estimator(&ch);
        let problem = TradeoffProblem::from_channel(&ch, &est).unwrap();
        let curve = sweep_mu(&problem, &[0.0], &SolverConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&curve, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("mu,capacity_bits,distortion,avg_cost,lambda,converged,outer_iters,tsa\n"));
        let rows = read_curve_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows, curve_rows(&curve));
        assert!((rows[0].capacity_bits - 0.6).abs() < 1e-6);
        assert!(rows[1].tsa && rows[2].tsa);
    }
}
