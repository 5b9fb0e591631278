//! Factor spaces, settings, designs, and observation sets.
//!
//! A factor space is an ordered list of factors, each with `N_l >= 2`
//! levels named `1..=N_l`. A design is a list of runs over such a space;
//! an observation set pairs a design with responses. Designs and
//! observation sets round-trip through a fixed CSV dialect (header
//! `f1,...,fp` plus optional trailing `y`; floats printed in Rust's
//! shortest round-trip form).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// How a factor's levels are to be treated by distance-aware models.
///
/// Ordinal levels carry the usual integer order (level 2 sits between 1
/// and 3); nominal levels are unordered labels. Marginal statistics
/// ignore the distinction; the GP covariances do not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorKind {
    Ordinal,
    Nominal,
}

/// One factor: a level count, a kind, and optional physical metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSpec {
    /// Number of levels, at least 2.
    pub levels: usize,
    pub kind: FactorKind,
    /// Physical value behind each level, if the factor discretizes a
    /// continuous quantity. Length must equal `levels`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

impl FactorSpec {
    pub fn ordinal(levels: usize) -> Self {
        FactorSpec { levels, kind: FactorKind::Ordinal, physical: None, unit: None }
    }

    pub fn nominal(levels: usize) -> Self {
        FactorSpec { levels, kind: FactorKind::Nominal, physical: None, unit: None }
    }

    pub fn with_physical(mut self, values: Vec<f64>) -> Self {
        self.physical = Some(values);
        self
    }

    fn validate(&self, index: usize) -> Result<()> {
        if self.levels < 2 {
            return Err(Error::InvalidSpace(format!(
                "factor {} has {} level(s); every factor needs at least 2",
                index + 1,
                self.levels
            )));
        }
        if let Some(ph) = &self.physical {
            if ph.len() != self.levels {
                return Err(Error::InvalidSpace(format!(
                    "factor {}: {} physical values for {} levels",
                    index + 1,
                    ph.len(),
                    self.levels
                )));
            }
            if ph.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSpace(format!(
                    "factor {}: non-finite physical value",
                    index + 1
                )));
            }
        }
        Ok(())
    }
}

/// An ordered list of factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSpace {
    factors: Vec<FactorSpec>,
}

impl FactorSpace {
    pub fn new(factors: Vec<FactorSpec>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSpace("no factors".into()));
        }
        for (i, f) in factors.iter().enumerate() {
            f.validate(i)?;
        }
        Ok(FactorSpace { factors })
    }

    /// `p` factors, all with the same level count and kind.
    pub fn uniform(p: usize, levels: usize, kind: FactorKind) -> Result<Self> {
        let f = FactorSpec { levels, kind, physical: None, unit: None };
        FactorSpace::new(vec![f; p])
    }

    /// Mixed-level space from a profile of level counts, all ordinal.
    pub fn from_profile(profile: &[usize]) -> Result<Self> {
        FactorSpace::new(profile.iter().map(|&n| FactorSpec::ordinal(n)).collect())
    }

    pub fn p(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[FactorSpec] {
        &self.factors
    }

    pub fn factor(&self, l: usize) -> &FactorSpec {
        &self.factors[l]
    }

    /// Level counts per factor.
    pub fn profile(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.levels).collect()
    }

    pub fn kinds(&self) -> Vec<FactorKind> {
        self.factors.iter().map(|f| f.kind).collect()
    }

    /// Total number of settings, or `None` on u64 overflow.
    pub fn cardinality(&self) -> Option<u64> {
        self.factors
            .iter()
            .try_fold(1u64, |acc, f| acc.checked_mul(f.levels as u64))
    }

    pub fn contains(&self, s: &Setting) -> bool {
        s.levels.len() == self.p()
            && s.levels
                .iter()
                .zip(&self.factors)
                .all(|(&lv, f)| lv >= 1 && lv <= f.levels)
    }

    /// Iterates every setting in lexicographic order (last factor fastest).
    ///
    /// Refuses spaces larger than `cap` (default 10^7) so a stray call on
    /// a huge space fails fast instead of spinning.
    pub fn enumerate(&self, cap: Option<u64>) -> Result<SettingIter> {
        let cap = cap.unwrap_or(10_000_000);
        match self.cardinality() {
            Some(n) if n <= cap => Ok(SettingIter {
                profile: self.profile(),
                next: Some(vec![1; self.p()]),
                remaining: n,
            }),
            Some(n) => Err(Error::TooLarge(format!(
                "{} settings exceed the enumeration cap of {}",
                n, cap
            ))),
            None => Err(Error::TooLarge(
                "setting count overflows u64; enumeration refused".into(),
            )),
        }
    }
}

/// Lexicographic iterator over all settings of a space.
#[derive(Debug, Clone)]
pub struct SettingIter {
    profile: Vec<usize>,
    next: Option<Vec<usize>>,
    remaining: u64,
}

impl Iterator for SettingIter {
    type Item = Setting;

    fn next(&mut self) -> Option<Setting> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut l = self.profile.len();
        loop {
            if l == 0 {
                break; // exhausted
            }
            l -= 1;
            if succ[l] < self.profile[l] {
                succ[l] += 1;
                self.next = Some(succ);
                break;
            }
            succ[l] = 1;
        }
        self.remaining -= 1;
        Some(Setting { levels: current })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.remaining as usize;
        (n, Some(n))
    }
}

/// One point of the factorial: a 1-based level per factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Setting {
    pub levels: Vec<usize>,
}

impl Setting {
    pub fn new(levels: Vec<usize>) -> Self {
        Setting { levels }
    }

    pub fn validated(levels: Vec<usize>, space: &FactorSpace) -> Result<Self> {
        let s = Setting { levels };
        if space.contains(&s) {
            Ok(s)
        } else {
            Err(Error::InvalidSetting(format!(
                "setting {} is outside the {}-factor space with profile {:?}",
                s,
                space.p(),
                space.profile()
            )))
        }
    }
}

impl fmt::Display for Setting {
    /// Levels joined by '-': `1-3-2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, lv) in self.levels.iter().enumerate() {
            if i > 0 {
                write!(f, "-")?;
            }
            write!(f, "{}", lv)?;
        }
        Ok(())
    }
}

/// Where a design's rows came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Straight out of the orthogonal-array catalog.
    CatalogOa,
    /// Catalog array after seeded level permutation and row shuffle.
    PermutedOa,
    /// Column-balanced random fallback; not an orthogonal array.
    BalancedRandom,
    /// Derived from a catalog array by level collapsing that broke exact
    /// balance; pairwise counts are near-uniform but not uniform.
    NearlyOrthogonal,
    /// Loaded from outside (CSV import, manual entry).
    External,
}

/// A list of runs over a fixed profile of level counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    profile: Vec<usize>,
    runs: Vec<Vec<usize>>,
    pub provenance: Provenance,
    /// Human-readable construction tag, e.g. `rao_hamming(q=3,t=3)`.
    pub construction: String,
}

impl Design {
    pub fn new(
        profile: Vec<usize>,
        runs: Vec<Vec<usize>>,
        provenance: Provenance,
        construction: impl Into<String>,
    ) -> Result<Self> {
        if profile.is_empty() {
            return Err(Error::InvalidDesign("empty profile".into()));
        }
        for (i, row) in runs.iter().enumerate() {
            if row.len() != profile.len() {
                return Err(Error::InvalidDesign(format!(
                    "run {} has {} entries for {} factors",
                    i + 1,
                    row.len(),
                    profile.len()
                )));
            }
            for (l, (&lv, &nl)) in row.iter().zip(&profile).enumerate() {
                if lv < 1 || lv > nl {
                    return Err(Error::InvalidDesign(format!(
                        "run {} factor {}: level {} outside 1..={}",
                        i + 1,
                        l + 1,
                        lv,
                        nl
                    )));
                }
            }
        }
        Ok(Design { profile, runs, provenance, construction: construction.into() })
    }

    pub fn n(&self) -> usize {
        self.runs.len()
    }

    pub fn p(&self) -> usize {
        self.profile.len()
    }

    pub fn profile(&self) -> &[usize] {
        &self.profile
    }

    pub fn runs(&self) -> &[Vec<usize>] {
        &self.runs
    }

    pub fn run(&self, i: usize) -> &[usize] {
        &self.runs[i]
    }

    pub fn setting(&self, i: usize) -> Setting {
        Setting::new(self.runs[i].clone())
    }

    pub fn column(&self, l: usize) -> Vec<usize> {
        self.runs.iter().map(|r| r[l]).collect()
    }

    /// Rows of `other` appended below `self`. Profiles must match.
    pub fn stack(&self, other: &Design) -> Result<Design> {
        if self.profile != other.profile {
            return Err(Error::InvalidDesign(format!(
                "profile mismatch: {:?} vs {:?}",
                self.profile, other.profile
            )));
        }
        let mut runs = self.runs.clone();
        runs.extend(other.runs.iter().cloned());
        Ok(Design {
            profile: self.profile.clone(),
            runs,
            provenance: if self.provenance == other.provenance {
                self.provenance
            } else {
                Provenance::External
            },
            construction: format!("stack({},{})", self.construction, other.construction),
        })
    }

    /// CSV with header `f1,...,fp`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        push_header(&mut out, self.p(), false);
        for row in &self.runs {
            let mut first = true;
            for lv in row {
                if !first {
                    out.push(',');
                }
                out.push_str(&lv.to_string());
                first = false;
            }
            out.push('\n');
        }
        out
    }

    /// Parses the design CSV dialect. The profile is inferred as the
    /// column-wise maximum unless `profile` is given.
    pub fn from_csv(text: &str, profile: Option<Vec<usize>>) -> Result<Design> {
        let (rows, _ys) = parse_table(text, false)?;
        if rows.is_empty() {
            return Err(Error::EmptyData("design CSV has no runs".into()));
        }
        let p = rows[0].len();
        let profile = match profile {
            Some(pr) => pr,
            None => (0..p)
                .map(|l| rows.iter().map(|r| r[l]).max().unwrap().max(2))
                .collect(),
        };
        Design::new(profile, rows, Provenance::External, "csv-import")
    }

    /// Plain-text array form: one run per line, levels space-separated.
    pub fn to_plain_text(&self) -> String {
        let mut out = String::new();
        for row in &self.runs {
            let line: Vec<String> = row.iter().map(|lv| lv.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_plain_text(text: &str, profile: Option<Vec<usize>>) -> Result<Design> {
        let mut rows: Vec<Vec<usize>> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut row = Vec::new();
            for tok in line.split_whitespace() {
                let lv: usize = tok.parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: format!("expected a level, found {:?}", tok),
                })?;
                row.push(lv);
            }
            if let Some(first) = rows.first() {
                if row.len() != first.len() {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("{} entries, expected {}", row.len(), first.len()),
                    });
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::EmptyData("no runs in plain-text array".into()));
        }
        let p = rows[0].len();
        let profile = match profile {
            Some(pr) => pr,
            None => (0..p)
                .map(|l| rows.iter().map(|r| r[l]).max().unwrap().max(2))
                .collect(),
        };
        Design::new(profile, rows, Provenance::External, "text-import")
    }
}

/// A design plus one response per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    pub design: Design,
    pub y: Vec<f64>,
    /// Known noise level of the responses, if any; informational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sd: Option<f64>,
}

impl ObservationSet {
    pub fn new(design: Design, y: Vec<f64>) -> Result<Self> {
        if design.n() != y.len() {
            return Err(Error::InvalidDesign(format!(
                "{} runs but {} responses",
                design.n(),
                y.len()
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "response {} is not finite ({})",
                i + 1,
                y[i]
            )));
        }
        Ok(ObservationSet { design, y, noise_sd: None })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.design.p()
    }

    /// Responses observed at `level` of factor `l` (0-based factor).
    pub fn project_marginal(&self, l: usize, level: usize) -> Vec<f64> {
        self.design
            .runs()
            .iter()
            .zip(&self.y)
            .filter(|(run, _)| run[l] == level)
            .map(|(_, &v)| v)
            .collect()
    }

    /// Appends another observation set over the same profile.
    pub fn append(&mut self, other: &ObservationSet) -> Result<()> {
        let stacked = self.design.stack(&other.design)?;
        self.design = stacked;
        self.y.extend_from_slice(&other.y);
        Ok(())
    }

    /// CSV with header `f1,...,fp,y`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        push_header(&mut out, self.p(), true);
        for (row, y) in self.design.runs().iter().zip(&self.y) {
            for lv in row {
                out.push_str(&lv.to_string());
                out.push(',');
            }
            out.push_str(&format!("{}\n", y));
        }
        out
    }

    pub fn from_csv(text: &str, profile: Option<Vec<usize>>) -> Result<ObservationSet> {
        let (rows, ys) = parse_table(text, true)?;
        if rows.is_empty() {
            return Err(Error::EmptyData("observation CSV has no runs".into()));
        }
        let p = rows[0].len();
        let profile = match profile {
            Some(pr) => pr,
            None => (0..p)
                .map(|l| rows.iter().map(|r| r[l]).max().unwrap().max(2))
                .collect(),
        };
        let design = Design::new(profile, rows, Provenance::External, "csv-import")?;
        ObservationSet::new(design, ys)
    }
}

fn push_header(out: &mut String, p: usize, with_y: bool) {
    for l in 1..=p {
        if l > 1 {
            out.push(',');
        }
        out.push_str(&format!("f{}", l));
    }
    if with_y {
        out.push_str(",y");
    }
    out.push('\n');
}

/// Parses the shared CSV dialect. Returns level rows and, when
/// `with_y`, the response column.
fn parse_table(text: &str, with_y: bool) -> Result<(Vec<Vec<usize>>, Vec<f64>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::EmptyData("empty CSV".into()))?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let p = if with_y {
        if cols.last().map(|c| c.trim()) != Some("y") {
            return Err(Error::Parse {
                line: 1,
                msg: "expected trailing response column named y".into(),
            });
        }
        cols.len() - 1
    } else {
        cols.len()
    };
    if p == 0 {
        return Err(Error::Parse { line: 1, msg: "no factor columns".into() });
    }
    for (i, c) in cols.iter().take(p).enumerate() {
        let expect = format!("f{}", i + 1);
        if c.trim() != expect {
            return Err(Error::Parse {
                line: 1,
                msg: format!("column {} named {:?}, expected {:?}", i + 1, c.trim(), expect),
            });
        }
    }
    let mut rows = Vec::new();
    let mut ys = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let want = if with_y { p + 1 } else { p };
        if fields.len() != want {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("{} fields, expected {}", fields.len(), want),
            });
        }
        let mut row = Vec::with_capacity(p);
        for f in fields.iter().take(p) {
            let lv: usize = f.trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("expected a level, found {:?}", f.trim()),
            })?;
            if lv == 0 {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "levels are 1-based; found 0".into(),
                });
            }
            row.push(lv);
        }
        if with_y {
            let v: f64 = fields[p].trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("expected a response, found {:?}", fields[p].trim()),
            })?;
            ys.push(v);
        }
        rows.push(row);
    }
    Ok((rows, ys))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space_223() -> FactorSpace {
        FactorSpace::from_profile(&[2, 2, 3]).unwrap()
    }

    #[test]
    fn rejects_single_level_factor() {
        let err = FactorSpace::from_profile(&[2, 1]).unwrap_err();
        assert!(matches!(err, Error::InvalidSpace(_)));
    }

    #[test]
    fn cardinality_and_enumerate() {
        let sp = space_223();
        assert_eq!(sp.cardinality(), Some(12));
        let all: Vec<Setting> = sp.enumerate(None).unwrap().collect();
        assert_eq!(all.len(), 12);
        assert_eq!(all[0].levels, vec![1, 1, 1]);
        assert_eq!(all[1].levels, vec![1, 1, 2]);
        assert_eq!(all[11].levels, vec![2, 2, 3]);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 12);
    }

    #[test]
    fn enumerate_cap_refuses_large_spaces() {
        let sp = FactorSpace::uniform(24, 4, FactorKind::Ordinal).unwrap();
        assert!(matches!(sp.enumerate(None), Err(Error::TooLarge(_))));
    }

    #[test]
    fn cardinality_overflow_is_none() {
        let sp = FactorSpace::uniform(40, 7, FactorKind::Ordinal).unwrap();
        assert_eq!(sp.cardinality(), None);
    }

    #[test]
    fn design_validates_levels() {
        let err = Design::new(
            vec![2, 2],
            vec![vec![1, 3]],
            Provenance::External,
            "t",
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidDesign(_)));
    }

    #[test]
    fn design_csv_roundtrip() {
        let d = Design::new(
            vec![2, 3],
            vec![vec![1, 3], vec![2, 1], vec![1, 2]],
            Provenance::CatalogOa,
            "t",
        )
        .unwrap();
        let csv = d.to_csv();
        assert!(csv.starts_with("f1,f2\n"));
        let back = Design::from_csv(&csv, Some(vec![2, 3])).unwrap();
        assert_eq!(back.runs(), d.runs());
    }

    #[test]
    fn observation_csv_roundtrip_preserves_floats() {
        let d = Design::new(
            vec![2, 2],
            vec![vec![1, 2], vec![2, 1]],
            Provenance::External,
            "t",
        )
        .unwrap();
        let obs = ObservationSet::new(d, vec![0.1 + 0.2, -1.5e-7]).unwrap();
        let csv = obs.to_csv();
        assert!(csv.starts_with("f1,f2,y\n"));
        let back = ObservationSet::from_csv(&csv, Some(vec![2, 2])).unwrap();
        assert_eq!(back.y, obs.y);
        assert_eq!(back.design.runs(), obs.design.runs());
    }

    #[test]
    fn observation_rejects_nan() {
        let d = Design::new(vec![2], vec![vec![1]], Provenance::External, "t").unwrap();
        assert!(ObservationSet::new(d, vec![f64::NAN]).is_err());
    }

    #[test]
    fn csv_parse_error_carries_line_number() {
        let text = "f1,f2,y\n1,2,0.5\n1,x,0.25\n";
        match ObservationSet::from_csv(text, None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {:?}", other),
        }
    }

    #[test]
    fn project_marginal_filters_by_level() {
        let d = Design::new(
            vec![2, 2],
            vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]],
            Provenance::External,
            "t",
        )
        .unwrap();
        let obs = ObservationSet::new(d, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(obs.project_marginal(0, 1), vec![1.0, 2.0]);
        assert_eq!(obs.project_marginal(1, 2), vec![2.0, 4.0]);
        assert!(obs.project_marginal(0, 3).is_empty());
    }

    #[test]
    fn setting_display_joins_with_dashes() {
        assert_eq!(Setting::new(vec![1, 3, 2]).to_string(), "1-3-2");
    }
}
