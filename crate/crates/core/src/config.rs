//! Run configuration: a TOML subset with fixed sections, parsed fail-closed.
//!
//! ```toml
//! [run]
//! model = "scalar-oleinik"
//! t_final = 0.2
//!
//! [basis]
//! level = 2
//!
//! [grid]
//! nx = 400
//! ```
//!
//! Everything not given falls back to the defaults of the chosen model preset.

use std::path::PathBuf;

use toml::{Table, Value};

use crate::basis::HaarTypeBasis;
use crate::error::{Error, Result};
use crate::models::Preset;
use crate::reference::ReferenceKind;
use crate::solver::{Boundary, CwenoParams, Grid, DEFAULT_CFL};

const KEYS: &[(&str, &[&str])] = &[
    (
        "run",
        &[
            "model",
            "t_final",
            "cfl",
            "output_stride",
            "out_dir",
            "seed",
            "threads",
        ],
    ),
    ("basis", &["kind", "level", "size", "subdomains"]),
    (
        "grid",
        &["nx", "ny", "x_min", "x_max", "y_min", "y_max", "boundary"],
    ),
    ("cweno", &["epsilon", "power"]),
    ("reference", &["kind", "refine", "xi_level", "samples"]),
    ("sweep", &["levels"]),
];

pub const MIN_CELLS: usize = 8;
const MAX_LEVEL: u32 = 10;

/// Stochastic basis family with its size parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisChoice {
    ClassicalHaar { level: u32 },
    Dct { size: usize },
    CanonicalHaar { size: usize },
    PiecewiseLinear { subdomains: usize },
}

impl BasisChoice {
    pub fn kind_name(&self) -> &'static str {
        match self {
            BasisChoice::ClassicalHaar { .. } => "haar",
            BasisChoice::Dct { .. } => "dct",
            BasisChoice::CanonicalHaar { .. } => "canonical-haar",
            BasisChoice::PiecewiseLinear { .. } => "piecewise-linear",
        }
    }

    /// Same family at sweep level `j`: Haar level `j`, DCT of size `2^(j+1)`,
    /// canonical Haar of size `j + 2`, `2^j` linear subdomains.
    pub fn at_level(&self, j: u32) -> Self {
        match self {
            BasisChoice::ClassicalHaar { .. } => BasisChoice::ClassicalHaar { level: j },
            BasisChoice::Dct { .. } => BasisChoice::Dct { size: 1 << (j + 1) },
            BasisChoice::CanonicalHaar { .. } => BasisChoice::CanonicalHaar { size: j as usize + 2 },
            BasisChoice::PiecewiseLinear { .. } => BasisChoice::PiecewiseLinear { subdomains: 1 << j },
        }
    }

    pub fn build(&self) -> Result<HaarTypeBasis> {
        match *self {
            BasisChoice::ClassicalHaar { level } => HaarTypeBasis::classical_haar(level),
            BasisChoice::Dct { size } => HaarTypeBasis::dct(size),
            BasisChoice::CanonicalHaar { size } => HaarTypeBasis::canonical_haar(size),
            BasisChoice::PiecewiseLinear { subdomains } => HaarTypeBasis::piecewise_linear(subdomains),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub nx: usize,
    /// `None` for one-dimensional models.
    pub ny: Option<usize>,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub boundary: Boundary,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        match self.ny {
            None => Grid::new_1d(self.nx, self.x_range, self.boundary),
            Some(ny) => Grid::new_2d(self.nx, ny, self.x_range, self.y_range, self.boundary),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceConfig {
    /// `None` disables the reference.
    pub kind: Option<ReferenceKind>,
    /// Spatial refinement factor of collocation runs.
    pub refine: usize,
    /// Collocation uses the `2^xi_level` Haar cells of that level.
    pub xi_level: u32,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Preset,
    pub basis: BasisChoice,
    pub grid: GridConfig,
    pub t_final: f64,
    pub cfl: f64,
    /// Steps between mode snapshots; 0 keeps only the initial and final state.
    pub output_stride: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
    pub cweno: CwenoParams,
    pub reference: ReferenceConfig,
    /// Inclusive basis level range.
    pub sweep: Option<(u32, u32)>,
}

impl RunConfig {
    /// Defaults of a preset with Haar level 2.
    pub fn for_preset(preset: Preset) -> Self {
        let g = preset.default_grid();
        let reference = match preset {
            Preset::ScalarOleinik => Some(ReferenceKind::ExactScalar),
            Preset::PSystemRiemann => Some(ReferenceKind::Collocation),
            Preset::EulerBox => Some(ReferenceKind::MonteCarlo),
            Preset::LevelSetBox => None,
        };
        Self {
            preset,
            basis: BasisChoice::ClassicalHaar { level: 2 },
            grid: GridConfig {
                nx: g.nx,
                ny: (g.space_dim == 2).then_some(g.ny),
                x_range: g.x_range,
                y_range: g.y_range,
                boundary: g.boundary,
            },
            t_final: preset.t_final(),
            cfl: DEFAULT_CFL,
            output_stride: 0,
            out_dir: PathBuf::from("out"),
            seed: 1,
            threads: None,
            cweno: CwenoParams::default(),
            reference: ReferenceConfig {
                kind: reference,
                refine: 4,
                xi_level: 5,
                samples: 200,
            },
            sweep: None,
        }
    }

    /// Checks the range constraints; `parse_config` calls this.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| {
            Err(Error::ConfigValue {
                key: key.into(),
                message,
            })
        };
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return bad("run.cfl", format!("must lie in (0, 1), got {}", self.cfl));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return bad(
                "run.t_final",
                format!("must be finite and >= 0, got {}", self.t_final),
            );
        }
        if self.grid.nx < MIN_CELLS {
            return bad(
                "grid.nx",
                format!("needs at least {MIN_CELLS} cells, got {}", self.grid.nx),
            );
        }
        let dim = self.preset.model_spec().space_dim();
        match (dim, self.grid.ny) {
            (1, Some(_)) => {
                return bad(
                    "grid.ny",
                    format!("model {} is one-dimensional", self.preset.name()),
                )
            }
            (2, None) => return bad("grid.ny", format!("model {} needs ny", self.preset.name())),
            (_, Some(ny)) if ny < MIN_CELLS => {
                return bad("grid.ny", format!("needs at least {MIN_CELLS} cells, got {ny}"));
            }
            _ => {}
        }
        if !(self.grid.x_range.0 < self.grid.x_range.1) {
            return bad("grid.x_max", "must exceed x_min".into());
        }
        if dim == 2 && !(self.grid.y_range.0 < self.grid.y_range.1) {
            return bad("grid.y_max", "must exceed y_min".into());
        }
        if !(self.cweno.epsilon > 0.0) {
            return bad(
                "cweno.epsilon",
                format!("must be positive, got {}", self.cweno.epsilon),
            );
        }
        if self.cweno.power < 1 {
            return bad("cweno.power", format!("must be >= 1, got {}", self.cweno.power));
        }
        if i64::try_from(self.seed).is_err() {
            return bad("run.seed", format!("must be <= {}", i64::MAX));
        }
        if self.threads == Some(0) {
            return bad("run.threads", "must be >= 1".into());
        }
        if self.reference.refine == 0 {
            return bad("reference.refine", "must be >= 1".into());
        }
        if self.reference.xi_level > MAX_LEVEL {
            return bad("reference.xi_level", format!("must be <= {MAX_LEVEL}"));
        }
        if self.reference.samples == 0 {
            return bad("reference.samples", "must be >= 1".into());
        }
        if self.reference.kind == Some(ReferenceKind::ExactScalar) && self.preset != Preset::ScalarOleinik {
            return bad(
                "reference.kind",
                "the exact reference exists only for scalar-oleinik".into(),
            );
        }
        if let Some((a, b)) = self.sweep {
            if a > b || b > MAX_LEVEL {
                return bad(
                    "sweep.levels",
                    format!("need J0 <= J1 <= {MAX_LEVEL}, got {a}..{b}"),
                );
            }
        }
        if let BasisChoice::ClassicalHaar { level } = self.basis {
            if level > MAX_LEVEL {
                return bad("basis.level", format!("must be <= {MAX_LEVEL}"));
            }
        }
        self.basis.build().map_err(|e| Error::ConfigValue {
            key: "basis".into(),
            message: e.to_string(),
        })?;
        Ok(())
    }

    /// Serialises every field; `parse_config(&c.render())` returns `c`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        s += "[run]\n";
        s += &format!("model = \"{}\"\n", self.preset.name());
        s += &format!("t_final = {:?}\n", self.t_final);
        s += &format!("cfl = {:?}\n", self.cfl);
        s += &format!("output_stride = {}\n", self.output_stride);
        s += &format!(
            "out_dir = {}\n",
            Value::from(self.out_dir.to_string_lossy().into_owned())
        );
        s += &format!("seed = {}\n", self.seed);
        if let Some(n) = self.threads {
            s += &format!("threads = {n}\n");
        }
        s += "\n[basis]\n";
        s += &format!("kind = \"{}\"\n", self.basis.kind_name());
        s += &match self.basis {
            BasisChoice::ClassicalHaar { level } => format!("level = {level}\n"),
            BasisChoice::Dct { size } | BasisChoice::CanonicalHaar { size } => format!("size = {size}\n"),
            BasisChoice::PiecewiseLinear { subdomains } => format!("subdomains = {subdomains}\n"),
        };
        s += "\n[grid]\n";
        s += &format!("nx = {}\n", self.grid.nx);
        if let Some(ny) = self.grid.ny {
            s += &format!("ny = {ny}\n");
        }
        s += &format!(
            "x_min = {:?}\nx_max = {:?}\n",
            self.grid.x_range.0, self.grid.x_range.1
        );
        if self.grid.ny.is_some() {
            s += &format!(
                "y_min = {:?}\ny_max = {:?}\n",
                self.grid.y_range.0, self.grid.y_range.1
            );
        }
        s += &format!("boundary = \"{}\"\n", self.grid.boundary.name());
        s += "\n[cweno]\n";
        s += &format!(
            "epsilon = {:?}\npower = {}\n",
            self.cweno.epsilon, self.cweno.power
        );
        s += "\n[reference]\n";
        s += &format!(
            "kind = \"{}\"\n",
            self.reference.kind.map_or("none", |k| k.name())
        );
        s += &format!(
            "refine = {}\nxi_level = {}\nsamples = {}\n",
            self.reference.refine, self.reference.xi_level, self.reference.samples
        );
        if let Some((a, b)) = self.sweep {
            s += &format!("\n[sweep]\nlevels = \"{a}..{b}\"\n");
        }
        s
    }
}

/// Parses an inclusive level range `J0..J1`.
pub fn parse_level_range(text: &str) -> Option<(u32, u32)> {
    let (a, b) = text.trim().split_once("..")?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
}

impl Section<'_> {
    fn get(&self, key: &str) -> Option<&Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        Error::ConfigValue {
            key: format!("{}.{}", self.name, key),
            message: message.into(),
        }
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Float(v)) => Ok(Some(*v)),
            Some(Value::Integer(v)) => Ok(Some(*v as f64)),
            Some(v) => Err(self.err(key, format!("expected a number, got {}", v.type_str()))),
        }
    }

    fn int(&self, key: &str) -> Result<Option<i64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(v)) => Ok(Some(*v)),
            Some(v) => Err(self.err(key, format!("expected an integer, got {}", v.type_str()))),
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        self.int(key)?
            .map(|v| usize::try_from(v).map_err(|_| self.err(key, format!("must be >= 0, got {v}"))))
            .transpose()
    }

    fn string(&self, key: &str) -> Result<Option<&str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(self.err(key, format!("expected a string, got {}", v.type_str()))),
        }
    }
}

/// Parses and validates a run configuration. `run.model` is required.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| Error::ConfigSyntax {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;

    for (name, value) in &root {
        let Some((_, keys)) = KEYS.iter().find(|(s, _)| s == name) else {
            let key = match value {
                Value::Table(t) if !t.is_empty() => format!("{name}.{}", t.keys().next().unwrap()),
                _ => name.clone(),
            };
            return Err(Error::ConfigValue {
                key,
                message: "unknown key".into(),
            });
        };
        let Value::Table(t) = value else {
            return Err(Error::ConfigValue {
                key: name.clone(),
                message: "expected a [section]".into(),
            });
        };
        if let Some(k) = t.keys().find(|k| !keys.contains(&k.as_str())) {
            return Err(Error::ConfigValue {
                key: format!("{name}.{k}"),
                message: "unknown key".into(),
            });
        }
    }

    let section = |name: &'static str| Section {
        name,
        table: root.get(name).and_then(Value::as_table),
    };
    let (run, basis, grid, cweno, reference, sweep) = (
        section("run"),
        section("basis"),
        section("grid"),
        section("cweno"),
        section("reference"),
        section("sweep"),
    );

    let model = run
        .string("model")?
        .ok_or_else(|| run.err("model", "is required"))?;
    let preset = Preset::from_name(model).ok_or_else(|| {
        let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
        run.err(
            "model",
            format!("unknown model `{model}` (expected one of {})", names.join(", ")),
        )
    })?;
    let mut c = RunConfig::for_preset(preset);

    if let Some(v) = run.float("t_final")? {
        c.t_final = v;
    }
    if let Some(v) = run.float("cfl")? {
        c.cfl = v;
    }
    if let Some(v) = run.count("output_stride")? {
        c.output_stride = v;
    }
    if let Some(v) = run.string("out_dir")? {
        c.out_dir = PathBuf::from(v);
    }
    if let Some(v) = run.int("seed")? {
        c.seed = u64::try_from(v).map_err(|_| run.err("seed", "must be >= 0"))?;
    }
    if let Some(v) = run.count("threads")? {
        c.threads = Some(v);
    }

    let kind = basis.string("kind")?.unwrap_or("haar");
    let size_key = |key: &str| -> Result<usize> {
        basis
            .count(key)?
            .ok_or_else(|| basis.err(key, format!("is required for kind `{kind}`")))
    };
    c.basis = match kind {
        "haar" => BasisChoice::ClassicalHaar {
            level: match basis.count("level")? {
                Some(v) => u32::try_from(v).map_err(|_| basis.err("level", "too large"))?,
                None => 2,
            },
        },
        "dct" => BasisChoice::Dct {
            size: size_key("size")?,
        },
        "canonical-haar" => BasisChoice::CanonicalHaar {
            size: size_key("size")?,
        },
        "piecewise-linear" => BasisChoice::PiecewiseLinear {
            subdomains: size_key("subdomains")?,
        },
        other => {
            return Err(basis.err(
                "kind",
                format!("unknown basis `{other}` (expected haar, dct, canonical-haar or piecewise-linear)"),
            ))
        }
    };
    for key in ["level", "size", "subdomains"] {
        let used = matches!(
            (key, kind),
            ("level", "haar") | ("size", "dct" | "canonical-haar") | ("subdomains", "piecewise-linear")
        );
        if !used && basis.get(key).is_some() {
            return Err(basis.err(key, format!("does not apply to basis kind `{kind}`")));
        }
    }

    if let Some(v) = grid.count("nx")? {
        c.grid.nx = v;
    }
    if let Some(v) = grid.count("ny")? {
        c.grid.ny = Some(v);
    }
    if let Some(v) = grid.float("x_min")? {
        c.grid.x_range.0 = v;
    }
    if let Some(v) = grid.float("x_max")? {
        c.grid.x_range.1 = v;
    }
    if let Some(v) = grid.float("y_min")? {
        c.grid.y_range.0 = v;
    }
    if let Some(v) = grid.float("y_max")? {
        c.grid.y_range.1 = v;
    }
    if let Some(v) = grid.string("boundary")? {
        c.grid.boundary =
            Boundary::from_name(v).ok_or_else(|| grid.err("boundary", format!("unknown boundary `{v}`")))?;
    }

    if let Some(v) = cweno.float("epsilon")? {
        c.cweno.epsilon = v;
    }
    if let Some(v) = cweno.int("power")? {
        c.cweno.power = i32::try_from(v).map_err(|_| cweno.err("power", "out of range"))?;
    }

    if let Some(v) = reference.string("kind")? {
        c.reference.kind = match v {
            "none" => None,
            _ => Some(
                ReferenceKind::from_name(v)
                    .ok_or_else(|| reference.err("kind", format!("unknown reference `{v}`")))?,
            ),
        };
    }
    if let Some(v) = reference.count("refine")? {
        c.reference.refine = v;
    }
    if let Some(v) = reference.count("xi_level")? {
        c.reference.xi_level = u32::try_from(v).map_err(|_| reference.err("xi_level", "too large"))?;
    }
    if let Some(v) = reference.count("samples")? {
        c.reference.samples = v;
    }

    if let Some(v) = sweep.string("levels")? {
        c.sweep = Some(
            parse_level_range(v)
                .ok_or_else(|| sweep.err("levels", format!("expected `J0..J1`, got `{v}`")))?,
        );
    }

    c.validate()?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        "[run]\nmodel = \"scalar-oleinik\"\nt_final = 0.2\n[basis]\nlevel = 3\n[grid]\nnx = 100\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.cfl, 0.45);
        assert_eq!(c.basis, BasisChoice::ClassicalHaar { level: 3 });
        assert_eq!(c.grid.nx, 100);
        assert_eq!(c.grid.ny, None);
        assert_eq!(c.reference.kind, Some(ReferenceKind::ExactScalar));
    }

    #[test]
    fn cfl_out_of_range_is_rejected() {
        let err = parse_config(&MINIMAL.replace("t_final = 0.2", "t_final = 0.2\ncfl = 1.5")).unwrap_err();
        assert!(
            matches!(err, Error::ConfigValue { ref key, .. } if key == "run.cfl"),
            "{err}"
        );
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = parse_config("[run]\nmodel = \"scalar-oleinik\"\n[gird]\nnx = 10\n").unwrap_err();
        assert!(err.to_string().contains("gird.nx"), "{err}");
        let err = parse_config("[run]\nmodel = \"scalar-oleinik\"\ncfll = 0.3\n").unwrap_err();
        assert!(err.to_string().contains("run.cfll"), "{err}");
        let err = parse_config("model = \"scalar-oleinik\"\n").unwrap_err();
        assert!(matches!(err, Error::ConfigValue { ref key, .. } if key == "model"));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_config("[run]\nmodel = \"scalar-oleinik\"\nnx = = 3\n").unwrap_err();
        assert!(matches!(err, Error::ConfigSyntax { line: 3, .. }), "{err}");
    }

    #[test]
    fn semantic_checks() {
        let base = "[run]\nmodel = \"euler-box\"\n";
        assert!(parse_config(base).is_ok());
        let cases = [
            ("[grid]\nnx = 4\n", "grid.nx"),
            ("[basis]\nkind = \"dct\"\n", "basis.size"),
            ("[basis]\nkind = \"dct\"\nsize = 8\nlevel = 2\n", "basis.level"),
            ("[sweep]\nlevels = \"3..1\"\n", "sweep.levels"),
            ("[reference]\nkind = \"exact\"\n", "reference.kind"),
            ("[grid]\nboundary = \"wall\"\n", "grid.boundary"),
        ];
        for (extra, key) in cases {
            let err = parse_config(&format!("{base}{extra}")).unwrap_err();
            assert!(
                matches!(err, Error::ConfigValue { key: ref k, .. } if k == key),
                "{extra}: {err}"
            );
        }
        let err = parse_config("[run]\nmodel = \"scalar-oleinik\"\n[grid]\nny = 10\n").unwrap_err();
        assert!(matches!(err, Error::ConfigValue { ref key, .. } if key == "grid.ny"));
    }

    #[test]
    fn render_round_trips() {
        let mut c = parse_config(MINIMAL).unwrap();
        assert_eq!(parse_config(&c.render()).unwrap(), c);
        c.threads = Some(3);
        c.sweep = Some((0, 4));
        c.cweno.epsilon = 1e-6;
        c.out_dir = PathBuf::from("dir with \"quotes\"");
        c.basis = BasisChoice::Dct { size: 16 };
        c.reference.kind = None;
        assert_eq!(parse_config(&c.render()).unwrap(), c);
        for p in Preset::ALL {
            let c = RunConfig::for_preset(p);
            c.validate().unwrap();
            assert_eq!(parse_config(&c.render()).unwrap(), c);
        }
    }

    #[test]
    fn sweep_levels_map_to_basis_sizes() {
        assert_eq!(
            BasisChoice::Dct { size: 2 }.at_level(3),
            BasisChoice::Dct { size: 16 }
        );
        assert_eq!(
            BasisChoice::ClassicalHaar { level: 0 }.at_level(4),
            BasisChoice::ClassicalHaar { level: 4 }
        );
        assert_eq!(parse_level_range("0..4"), Some((0, 4)));
        assert_eq!(parse_level_range("a..4"), None);
    }
}
