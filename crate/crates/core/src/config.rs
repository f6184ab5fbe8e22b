//! Run configuration: a flat `key = value` text format with `[section]`
//! headers, plus the gamma-file and group-file formats it refers to.
//!
//! ```text
//! group = su2
//! subgroup = u1
//! bundle = monopole(1, 1/2)
//! connection = gamma-file(crafted.gamma)
//!
//! [tolerances]
//! dirac.selfadjoint_defect = 1e-8
//! ```
//!
//! Keys may sit at the top or under `[run]`; `[tolerances]` maps check
//! names to positive reals.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lie::{GroupModel, GroupSpec, C64};
use crate::rep::Spin;

pub const DEFAULT_BANDWIDTH: u32 = 8;
pub const DEFAULT_SAMPLES: usize = 50;
pub const DEFAULT_LEVELS: u32 = 4;

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Clone, Debug, PartialEq)]
pub enum BundleChoice {
    /// Charge n with an optional override of the extension level.
    Monopole {
        charge: i32,
        level: Option<Spin>,
    },
    Tangent,
    Clifford,
}

impl FromStr for BundleChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "tangent" => return Ok(BundleChoice::Tangent),
            "clifford" | "spinor" => return Ok(BundleChoice::Clifford),
            _ => {}
        }
        let args = s
            .strip_prefix("monopole(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| config_err(format!("unknown bundle '{s}'")))?;
        let mut parts = args.split(',').map(str::trim);
        let charge = parts
            .next()
            .filter(|p| !p.is_empty())
            .ok_or_else(|| config_err("monopole needs a charge"))?
            .parse::<i32>()
            .map_err(|e| config_err(format!("monopole charge: {e}")))?;
        let level = parts.next().map(parse_spin).transpose()?;
        if parts.next().is_some() {
            return Err(config_err("monopole takes (charge) or (charge, level)"));
        }
        Ok(BundleChoice::Monopole { charge, level })
    }
}

impl fmt::Display for BundleChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BundleChoice::Monopole { charge, level: None } => write!(f, "monopole({charge})"),
            BundleChoice::Monopole { charge, level: Some(l) } => write!(f, "monopole({charge}, {l})"),
            BundleChoice::Tangent => f.write_str("tangent"),
            BundleChoice::Clifford => f.write_str("clifford"),
        }
    }
}

/// Spins as "1/2", "3/2", "1" or "0.5".
pub fn parse_spin(s: &str) -> Result<Spin> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: u32 = num.trim().parse().map_err(|e| config_err(format!("spin '{s}': {e}")))?;
        return match den.trim() {
            "2" => Ok(Spin(num)),
            "1" => Ok(Spin(2 * num)),
            _ => Err(config_err(format!("spin '{s}' is not a half-integer"))),
        };
    }
    let v: f64 = s.parse().map_err(|e| config_err(format!("spin '{s}': {e}")))?;
    Spin::from_f64(v).ok_or_else(|| config_err(format!("spin '{s}' is not a non-negative half-integer")))
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConnectionChoice {
    Canonical,
    LeviCivita,
    GammaFile(PathBuf),
}

impl FromStr for ConnectionChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "canonical" => Ok(ConnectionChoice::Canonical),
            "levi-civita" => Ok(ConnectionChoice::LeviCivita),
            _ => s
                .strip_prefix("gamma-file(")
                .and_then(|r| r.strip_suffix(')'))
                .map(|p| ConnectionChoice::GammaFile(PathBuf::from(p.trim())))
                .ok_or_else(|| config_err(format!("unknown connection '{s}'"))),
        }
    }
}

impl fmt::Display for ConnectionChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConnectionChoice::Canonical => f.write_str("canonical"),
            ConnectionChoice::LeviCivita => f.write_str("levi-civita"),
            ConnectionChoice::GammaFile(p) => write!(f, "gamma-file({})", p.display()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Catalog name or path to a group file.
    pub group: String,
    /// "u1" or "trivial" for the catalog group; ignored for group files.
    pub subgroup: Option<String>,
    pub inner_product_scale: f64,
    pub bundle: BundleChoice,
    pub connection: ConnectionChoice,
    pub quadrature_bandwidth: u32,
    pub sample_count: usize,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub output: Option<PathBuf>,
    /// Highest spin level for spectra.
    pub levels: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            group: "su2".into(),
            subgroup: None,
            inner_product_scale: 1.0,
            bundle: BundleChoice::Tangent,
            connection: ConnectionChoice::LeviCivita,
            quadrature_bandwidth: DEFAULT_BANDWIDTH,
            sample_count: DEFAULT_SAMPLES,
            seed: 0,
            tolerances: BTreeMap::new(),
            output: None,
            levels: DEFAULT_LEVELS,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.parse().map_err(|e| config_err(format!("{key}: {e}")))
}

/// Key/value pairs grouped by section, in file order. Lines starting with
/// `#` are comments.
fn sections(text: &str) -> Result<Vec<(String, String, String)>> {
    let mut out = Vec::new();
    let mut section = String::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("line {}: expected key = value", n + 1)))?;
        out.push((section.clone(), k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (section, key, value) in sections(text)? {
            match section.as_str() {
                "" | "run" => cfg.set(&key, &value)?,
                "tolerances" => {
                    let t: f64 = parse_num(&key, &value)?;
                    cfg.tolerances.insert(key, t);
                }
                other => return Err(config_err(format!("unknown section [{other}]"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative gamma-file and group paths resolve
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let ConnectionChoice::GammaFile(p) = &cfg.connection {
            if p.is_relative() {
                cfg.connection = ConnectionChoice::GammaFile(base.join(p));
            }
        }
        if !is_catalog(&cfg.group) && Path::new(&cfg.group).is_relative() {
            cfg.group = base.join(&cfg.group).display().to_string();
        }
        Ok(cfg)
    }

    /// Sets one field by its snake_case or kebab-case name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.replace('-', "_").as_str() {
            "group" => self.group = value.to_string(),
            "subgroup" => self.subgroup = Some(value.to_string()),
            "inner_product_scale" => self.inner_product_scale = parse_num(key, value)?,
            "bundle" => self.bundle = value.parse()?,
            "connection" => self.connection = value.parse()?,
            "quadrature_bandwidth" => self.quadrature_bandwidth = parse_num(key, value)?,
            "sample_count" => self.sample_count = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            "levels" => self.levels = parse_num(key, value)?,
            _ => return Err(config_err(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| v.is_nan() || **v <= 0.0) {
            return Err(config_err(format!("tolerance {k} = {v} must be positive")));
        }
        if self.inner_product_scale.is_nan() || self.inner_product_scale <= 0.0 {
            return Err(config_err("inner_product_scale must be positive"));
        }
        if self.quadrature_bandwidth == 0 {
            return Err(config_err("quadrature_bandwidth must be ≥ 1"));
        }
        if self.sample_count == 0 {
            return Err(config_err("sample_count must be ≥ 1"));
        }
        Ok(())
    }

    pub fn tolerance(&self, check: &str, default: f64) -> f64 {
        self.tolerances.get(check).copied().unwrap_or(default)
    }

    /// Resolves the group and subgroup.
    pub fn build_group(&self) -> Result<Arc<GroupModel>> {
        if is_catalog(&self.group) {
            let name = match (self.group.as_str(), self.subgroup.as_deref()) {
                ("su2" | "su2-u1", None | Some("u1" | "circle")) => "su2",
                ("su2" | "su2-trivial-k", Some("trivial" | "e")) | ("su2-trivial-k", None) => "su2-trivial-k",
                (g, Some(k)) => return Err(config_err(format!("unknown subgroup '{k}' of {g}"))),
                (g, None) => return Err(config_err(format!("unknown group '{g}'"))),
            };
            return GroupModel::catalog(name, self.inner_product_scale);
        }
        let path = Path::new(&self.group);
        if !path.is_file() {
            return Err(config_err(format!(
                "'{}' is neither a catalog group nor a readable group file",
                self.group
            )));
        }
        let text = fs::read_to_string(path)?;
        GroupModel::build(parse_group_file(&text, self.inner_product_scale)?)
    }
}

fn is_catalog(name: &str) -> bool {
    matches!(name, "su2" | "su2-u1" | "su2-trivial-k")
}

fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
}

fn parse_complex(tok: &str) -> Result<C64> {
    C64::from_str(tok).map_err(|_| config_err(format!("malformed number '{tok}'")))
}

/// `count` blocks of `n × n` row-major entries; entries are reals or
/// complex numbers such as `0.5i` or `1-2i`.
fn parse_blocks(text: &str, count: Option<usize>, n: usize) -> Result<Vec<DMatrix<C64>>> {
    let entries: Vec<C64> = tokens(text).map(parse_complex).collect::<Result<_>>()?;
    let per = n * n;
    if per == 0 || !entries.len().is_multiple_of(per) || count.is_some_and(|c| c * per != entries.len()) {
        return Err(config_err(format!(
            "expected {} blocks of {n}×{n} entries, found {} entries",
            count.map_or("whole".to_string(), |c| c.to_string()),
            entries.len()
        )));
    }
    Ok(entries.chunks(per).map(|c| DMatrix::from_row_slice(n, n, c)).collect())
}

/// γ(e_1), …, γ(e_p) as `p` whitespace-separated `h × h` blocks.
pub fn parse_gamma_file(text: &str, p: usize, h: usize) -> Result<Vec<DMatrix<C64>>> {
    parse_blocks(text, Some(p), h)
}

pub fn load_gamma_file(path: &Path, p: usize, h: usize) -> Result<Vec<DMatrix<C64>>> {
    let text = fs::read_to_string(path).map_err(|e| config_err(format!("gamma file {}: {e}", path.display())))?;
    parse_gamma_file(&text, p, h)
}

/// Real parts of γ blocks, rejecting imaginary entries.
pub fn real_blocks(blocks: &[DMatrix<C64>]) -> Result<Vec<DMatrix<f64>>> {
    if blocks.iter().flat_map(|b| b.iter()).any(|z| z.im != 0.0) {
        return Err(config_err("tangent gamma blocks must be real"));
    }
    Ok(blocks.iter().map(|b| b.map(|z| z.re)).collect())
}

/// A group file: header keys `name`, `matrix_dim`, `subgroup` (comma
/// separated basis indices, possibly empty) and `subgroup_period`, then a
/// `[basis]` section of skew-Hermitian `matrix_dim × matrix_dim` blocks.
pub fn parse_group_file(text: &str, inner_product_scale: f64) -> Result<GroupSpec> {
    let (head, body) = text
        .split_once("[basis]")
        .ok_or_else(|| config_err("group file lacks a [basis] section"))?;
    let mut name = "custom".to_string();
    let mut n = None;
    let mut subgroup = Vec::new();
    let mut period = None;
    for (section, key, value) in sections(head)? {
        if !section.is_empty() {
            return Err(config_err(format!("unknown section [{section}] in group file")));
        }
        match key.as_str() {
            "name" => name = value,
            "matrix_dim" => n = Some(parse_num::<usize>(&key, &value)?),
            "subgroup" => {
                subgroup = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_num::<usize>(&key, s))
                    .collect::<Result<_>>()?
            }
            "subgroup_period" => period = Some(parse_num::<f64>(&key, &value)?),
            _ => return Err(config_err(format!("unknown group-file key '{key}'"))),
        }
    }
    let n = n.ok_or_else(|| config_err("group file needs matrix_dim"))?;
    let basis = parse_blocks(body, None, n)?;
    Ok(GroupSpec {
        name,
        basis,
        subgroup,
        subgroup_period: period,
        inner_product_scale,
    })
}
