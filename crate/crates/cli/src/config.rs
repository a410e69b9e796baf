//! JSON experiment configuration. Every field has a default, so a config file
//! only needs the values it overrides.

use std::path::{Path, PathBuf};

use mdlac::score::{Criterion, Epsilon};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CriterionChoice {
    Mdl,
    Nfa,
    #[default]
    Both,
}

impl CriterionChoice {
    pub fn criteria(self) -> Vec<Criterion> {
        match self {
            CriterionChoice::Mdl => vec![Criterion::Mdl],
            CriterionChoice::Nfa => vec![Criterion::Nfa],
            CriterionChoice::Both => vec![Criterion::Mdl, Criterion::Nfa],
        }
    }
}

/// Which pixel value is scored as foreground in the single-square sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Score the less frequent pixel value (the image is inverted when ones
    /// are the majority).
    #[default]
    Minority,
    /// Always score the ones.
    Ones,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    #[default]
    Noise,
    Margin,
}

/// `start, start + step, ...` up to `end` inclusive, rounded to suppress drift.
pub fn float_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SingleSweepConfig {
    pub width: usize,
    pub height: usize,
    pub sides: Vec<usize>,
    pub deltas: Vec<f64>,
    pub seeds: u64,
    pub polarity: Polarity,
}

impl Default for SingleSweepConfig {
    fn default() -> Self {
        Self {
            width: 100,
            height: 100,
            sides: (5..=95).step_by(5).collect(),
            deltas: float_grid(0.02, 0.48, 0.02),
            seeds: 100,
            polarity: Polarity::Minority,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseAxisConfig {
    /// Extent of the 2x2 arrangement.
    pub outer: usize,
    pub margin: usize,
    pub deltas: Vec<f64>,
}

impl Default for NoiseAxisConfig {
    fn default() -> Self {
        Self {
            outer: 56,
            margin: 16,
            deltas: float_grid(0.30, 0.46, 0.01),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarginAxisConfig {
    pub outer: usize,
    pub margins: Vec<usize>,
    pub deltas: Vec<f64>,
}

impl Default for MarginAxisConfig {
    fn default() -> Self {
        Self {
            outer: 28,
            margins: (0..=26).step_by(2).collect(),
            deltas: vec![0.2, 0.4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiSweepConfig {
    pub canvas: usize,
    pub seeds: u64,
    pub noise: NoiseAxisConfig,
    pub margin: MarginAxisConfig,
}

impl Default for MultiSweepConfig {
    fn default() -> Self {
        Self {
            canvas: 256,
            seeds: 21,
            noise: NoiseAxisConfig::default(),
            margin: MarginAxisConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    #[default]
    Star,
    Blob,
    Cross,
    Arrow,
}

/// A synthetic noisy shape with an over-sampled, jittered initial polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapeConfig {
    pub kind: ShapeKind,
    pub size: usize,
    pub delta: f64,
    pub initial_vertices: usize,
    pub jitter: f64,
}

impl Default for ShapeConfig {
    fn default() -> Self {
        Self {
            kind: ShapeKind::Star,
            size: 128,
            delta: 0.15,
            initial_vertices: 60,
            jitter: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolygonConfig {
    /// Binary PGM input; a synthetic shape is generated when absent.
    pub image: Option<PathBuf>,
    /// Initial vertex file; traced from the image when absent.
    pub vertices: Option<PathBuf>,
    pub smoothing_radius: usize,
    pub max_vertices: usize,
    pub shape: ShapeConfig,
    pub render: bool,
}

impl Default for PolygonConfig {
    fn default() -> Self {
        Self {
            image: None,
            vertices: None,
            smoothing_radius: 1,
            max_vertices: 63,
            shape: ShapeConfig::default(),
            render: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LsdSection {
    /// Grayscale PGM input; a synthetic facade is generated when absent.
    pub image: Option<PathBuf>,
    /// Optional `ax ay bx by w` candidate file replacing region growing.
    pub candidates: Option<PathBuf>,
    pub rho: f64,
    pub gamma: f64,
    pub tau: f64,
    /// Image size used for the `(n_r, k_r)` boundary table.
    pub table_image_pixels: u64,
    pub table_max_nr: u64,
    /// Random orientation maps for the false-alarm check (0 disables it).
    pub h0_maps: u64,
    pub h0_size: usize,
    pub render: bool,
}

impl Default for LsdSection {
    fn default() -> Self {
        Self {
            image: None,
            candidates: None,
            rho: std::f64::consts::PI / 8.0,
            gamma: 1.0,
            tau: mdlac::imaging::DEFAULT_GRADIENT_THRESHOLD,
            table_image_pixels: 512 * 512,
            table_max_nr: 60,
            h0_maps: 0,
            h0_size: 256,
            render: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XiKind {
    CountOnes,
    LongestRun,
    WeightedSum,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartConfig {
    pub length: usize,
    pub xi: XiKind,
    /// Risk weight; defaults to the number of parts.
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default = "default_levels")]
    pub levels: u32,
}

fn default_levels() -> u32 {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub alphabet: u32,
    pub parts: Vec<PartConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquivConfig {
    pub families: Vec<FamilyConfig>,
}

impl Default for EquivConfig {
    fn default() -> Self {
        let mut families = Vec::new();
        for alphabet in [2, 3] {
            let parts: Vec<PartConfig> = [4, 6, 8]
                .iter()
                .flat_map(|&length| {
                    [XiKind::CountOnes, XiKind::LongestRun, XiKind::WeightedSum]
                        .into_iter()
                        .map(move |xi| PartConfig {
                            length,
                            xi,
                            eta: None,
                            levels: default_levels(),
                        })
                })
                .collect();
            families.push(FamilyConfig {
                alphabet,
                parts: parts.clone(),
            });
            // the same parts with weights 2, 4, 8, ... closing the Kraft sum at 1
            let count = parts.len();
            let skewed = parts
                .into_iter()
                .enumerate()
                .map(|(i, mut p)| {
                    let e = (i + 1).min(count - 1) as i32;
                    p.eta = Some(2f64.powi(e));
                    p
                })
                .collect();
            families.push(FamilyConfig {
                alphabet,
                parts: skewed,
            });
        }
        families.push(FamilyConfig {
            alphabet: 3,
            parts: [2.0, 4.0, 8.0, 8.0]
                .iter()
                .map(|&eta| PartConfig {
                    length: 6,
                    xi: XiKind::Random,
                    eta: Some(eta),
                    levels: 20,
                })
                .collect(),
        });
        Self { families }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub epsilon: f64,
    pub criterion: CriterionChoice,
    pub out: PathBuf,
    pub single: SingleSweepConfig,
    pub multi: MultiSweepConfig,
    pub polygon: PolygonConfig,
    pub lsd: LsdSection,
    pub equiv: EquivConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            epsilon: 1.0,
            criterion: CriterionChoice::Both,
            out: PathBuf::from("out"),
            single: SingleSweepConfig::default(),
            multi: MultiSweepConfig::default(),
            polygon: PolygonConfig::default(),
            lsd: LsdSection::default(),
            equiv: EquivConfig::default(),
        }
    }
}

fn check_deltas(name: &str, deltas: &[f64]) -> Result<(), CliError> {
    if deltas.is_empty() {
        return Err(CliError::Config(format!("{name}: empty noise grid")));
    }
    if let Some(d) = deltas.iter().find(|&&d| !(d > 0.0 && d < 0.5)) {
        return Err(CliError::Config(format!(
            "{name}: noise level {d} outside (0, 0.5)"
        )));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn epsilon(&self) -> Result<Epsilon, CliError> {
        Epsilon::new(self.epsilon)
            .ok_or_else(|| CliError::Config(format!("epsilon {} must be positive", self.epsilon)))
    }

    pub fn validate_single(&self) -> Result<(), CliError> {
        let s = &self.single;
        check_deltas("single.deltas", &s.deltas)?;
        if s.seeds == 0 {
            return Err(CliError::Config("single.seeds must be at least 1".into()));
        }
        if s.sides.is_empty() {
            return Err(CliError::Config("single.sides is empty".into()));
        }
        if let Some(side) = s
            .sides
            .iter()
            .find(|&&v| v == 0 || v > s.width.min(s.height) || v * v == s.width * s.height)
        {
            return Err(CliError::Config(format!(
                "single.sides: side {side} does not fit with a background"
            )));
        }
        self.epsilon()?;
        Ok(())
    }

    pub fn validate_multi(&self, axis: Axis) -> Result<(), CliError> {
        let m = &self.multi;
        if m.seeds == 0 {
            return Err(CliError::Config("multi.seeds must be at least 1".into()));
        }
        match axis {
            Axis::Noise => {
                check_deltas("multi.noise.deltas", &m.noise.deltas)?;
                if mdlac::square_detect::FourSquareLayout::centred(
                    m.canvas,
                    m.noise.outer,
                    m.noise.margin,
                )
                .is_none()
                {
                    return Err(CliError::Config("multi.noise: layout does not fit".into()));
                }
            }
            Axis::Margin => {
                check_deltas("multi.margin.deltas", &m.margin.deltas)?;
                if m.margin.margins.is_empty() {
                    return Err(CliError::Config("multi.margin.margins is empty".into()));
                }
                for &g in &m.margin.margins {
                    if mdlac::square_detect::FourSquareLayout::centred(m.canvas, m.margin.outer, g)
                        .is_none()
                    {
                        return Err(CliError::Config(format!(
                            "multi.margin: margin {g} does not fit"
                        )));
                    }
                }
            }
        }
        self.epsilon()?;
        Ok(())
    }

    pub fn validate_polygon(&self) -> Result<(), CliError> {
        let s = &self.polygon.shape;
        if self.polygon.image.is_none() {
            if !(s.delta > 0.0 && s.delta < 0.5) {
                return Err(CliError::Config(
                    "polygon.shape.delta outside (0, 0.5)".into(),
                ));
            }
            if s.initial_vertices < 3 || s.size < 16 {
                return Err(CliError::Config(
                    "polygon.shape needs size >= 16 and >= 3 vertices".into(),
                ));
            }
        }
        if self.polygon.max_vertices < 3 {
            return Err(CliError::Config(
                "polygon.max_vertices must be at least 3".into(),
            ));
        }
        self.epsilon()?;
        Ok(())
    }

    pub fn lsd_config(&self) -> Result<mdlac::lsd::LsdConfig, CliError> {
        mdlac::lsd::LsdConfig::new(self.lsd.rho, self.lsd.gamma, self.epsilon()?, self.lsd.tau)
            .map_err(|e| CliError::Config(format!("lsd: {e}")))
    }
}
