//! Kernel families, Gram (kernel similarity) matrices and bandwidth selection.
//!
//! Kernel specs share one text grammar, `family[:key=value,...]`, used on the
//! command line and inside model files:
//!
//! | family               | value                           | keys          |
//! |----------------------|---------------------------------|---------------|
//! | `gaussian`           | `exp(−‖u−v‖² / gamma)`          | `gamma`       |
//! | `linear`             | `u·v`                           |               |
//! | `polynomial`         | `(a·u·v + c)^d`                 | `a`, `c`, `d` |
//! | `rational_quadratic` | `1 − ‖u−v‖² / (‖u−v‖² + c)`     | `c`           |
//! | `multiquadric`       | `sqrt(‖u−v‖² + c²)`             | `c`           |
//! | `sigmoid`            | `tanh(a·u·v + c)`               | `a`, `c`      |
//!
//! `gamma` is a bandwidth in the denominator, so it scales with the squared
//! distances between frames (≈10⁸ for 150×100 frames in 0..255).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{dot, squared_distance, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Gaussian,
    Linear,
    Polynomial,
    RationalQuadratic,
    Multiquadric,
    Sigmoid,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 6] = [
        KernelFamily::Gaussian,
        KernelFamily::Linear,
        KernelFamily::Polynomial,
        KernelFamily::RationalQuadratic,
        KernelFamily::Multiquadric,
        KernelFamily::Sigmoid,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Linear => "linear",
            KernelFamily::Polynomial => "polynomial",
            KernelFamily::RationalQuadratic => "rational_quadratic",
            KernelFamily::Multiquadric => "multiquadric",
            KernelFamily::Sigmoid => "sigmoid",
        }
    }

    fn allowed_keys(&self) -> &'static [&'static str] {
        match self {
            KernelFamily::Gaussian => &["gamma"],
            KernelFamily::Linear => &[],
            KernelFamily::Polynomial => &["a", "c", "d"],
            KernelFamily::RationalQuadratic | KernelFamily::Multiquadric => &["c"],
            KernelFamily::Sigmoid => &["a", "c"],
        }
    }
}

impl FromStr for KernelFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        KernelFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown kernel family {s:?}"))
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A fully parameterized kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec {
    Gaussian { gamma: f64 },
    Linear,
    Polynomial { a: f64, c: f64, d: u32 },
    RationalQuadratic { c: f64 },
    Multiquadric { c: f64 },
    Sigmoid { a: f64, c: f64 },
}

impl KernelSpec {
    pub fn gaussian(gamma: f64) -> Result<Self> {
        let k = KernelSpec::Gaussian { gamma };
        k.validate()?;
        Ok(k)
    }

    pub fn family(&self) -> KernelFamily {
        match self {
            KernelSpec::Gaussian { .. } => KernelFamily::Gaussian,
            KernelSpec::Linear => KernelFamily::Linear,
            KernelSpec::Polynomial { .. } => KernelFamily::Polynomial,
            KernelSpec::RationalQuadratic { .. } => KernelFamily::RationalQuadratic,
            KernelSpec::Multiquadric { .. } => KernelFamily::Multiquadric,
            KernelSpec::Sigmoid { .. } => KernelFamily::Sigmoid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| {
            Err(Error::KernelSpec {
                spec: self.to_string(),
                reason: reason.to_string(),
            })
        };
        match *self {
            KernelSpec::Gaussian { gamma } => {
                if !(gamma.is_finite() && gamma > 0.0) {
                    return bad("gamma must be finite and > 0");
                }
            }
            KernelSpec::Linear => {}
            KernelSpec::Polynomial { a, c, d } => {
                if !(a.is_finite() && c.is_finite()) {
                    return bad("a and c must be finite");
                }
                if d < 1 {
                    return bad("degree d must be >= 1");
                }
            }
            KernelSpec::RationalQuadratic { c } | KernelSpec::Multiquadric { c } => {
                if !(c.is_finite() && c > 0.0) {
                    return bad("c must be finite and > 0");
                }
            }
            KernelSpec::Sigmoid { a, c } => {
                if !(a.is_finite() && c.is_finite()) {
                    return bad("a and c must be finite");
                }
            }
        }
        Ok(())
    }

    /// Kernel value without shape or finiteness checks.
    #[inline]
    pub(crate) fn eval(&self, u: &[f64], v: &[f64]) -> f64 {
        match *self {
            KernelSpec::Gaussian { gamma } => (-squared_distance(u, v) / gamma).exp(),
            KernelSpec::Linear => dot(u, v),
            KernelSpec::Polynomial { a, c, d } => (a * dot(u, v) + c).powi(d as i32),
            KernelSpec::RationalQuadratic { c } => {
                let d2 = squared_distance(u, v);
                1.0 - d2 / (d2 + c)
            }
            KernelSpec::Multiquadric { c } => (squared_distance(u, v) + c * c).sqrt(),
            KernelSpec::Sigmoid { a, c } => (a * dot(u, v) + c).tanh(),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Gaussian { gamma } => write!(f, "gaussian:gamma={gamma:e}"),
            KernelSpec::Linear => f.write_str("linear"),
            KernelSpec::Polynomial { a, c, d } => write!(f, "polynomial:a={a:e},c={c:e},d={d}"),
            KernelSpec::RationalQuadratic { c } => write!(f, "rational_quadratic:c={c:e}"),
            KernelSpec::Multiquadric { c } => write!(f, "multiquadric:c={c:e}"),
            KernelSpec::Sigmoid { a, c } => write!(f, "sigmoid:a={a:e},c={c:e}"),
        }
    }
}

/// Strict parse: every parameter must be present and `gamma=auto` is rejected.
impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let cfg: KernelConfig = s.parse()?;
        let missing = |key: &str| Error::KernelSpec {
            spec: s.to_string(),
            reason: format!("missing {key}"),
        };
        let spec = match cfg.family {
            KernelFamily::Gaussian => KernelSpec::Gaussian {
                gamma: cfg.gamma.ok_or_else(|| missing("gamma"))?,
            },
            KernelFamily::Linear => KernelSpec::Linear,
            KernelFamily::Polynomial => KernelSpec::Polynomial {
                a: cfg.a.ok_or_else(|| missing("a"))?,
                c: cfg.c.ok_or_else(|| missing("c"))?,
                d: cfg.d.ok_or_else(|| missing("d"))?,
            },
            KernelFamily::RationalQuadratic => KernelSpec::RationalQuadratic {
                c: cfg.c.ok_or_else(|| missing("c"))?,
            },
            KernelFamily::Multiquadric => KernelSpec::Multiquadric {
                c: cfg.c.ok_or_else(|| missing("c"))?,
            },
            KernelFamily::Sigmoid => KernelSpec::Sigmoid {
                a: cfg.a.ok_or_else(|| missing("a"))?,
                c: cfg.c.ok_or_else(|| missing("c"))?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// A kernel spec that may leave parameters to data-dependent defaults.
///
/// Missing or `auto` gamma resolves to [`median_bandwidth`]; missing `a` to
/// `1/D`; missing `c` to 1; missing `d` to 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub family: KernelFamily,
    pub gamma: Option<f64>,
    pub a: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<u32>,
}

impl KernelConfig {
    pub fn new(family: KernelFamily) -> Self {
        Self {
            family,
            gamma: None,
            a: None,
            c: None,
            d: None,
        }
    }

    pub fn gaussian_auto() -> Self {
        Self::new(KernelFamily::Gaussian)
    }

    /// Fills defaults from the explanatory rows the kernel will be applied to.
    pub fn resolve(&self, rows: &DenseMatrix) -> Result<KernelSpec> {
        let dim = rows.cols().max(1) as f64;
        let a = self.a.unwrap_or(1.0 / dim);
        let c = self.c.unwrap_or(1.0);
        let spec = match self.family {
            KernelFamily::Gaussian => KernelSpec::Gaussian {
                gamma: match self.gamma {
                    Some(g) => g,
                    None => median_bandwidth(rows)?,
                },
            },
            KernelFamily::Linear => KernelSpec::Linear,
            KernelFamily::Polynomial => KernelSpec::Polynomial {
                a,
                c,
                d: self.d.unwrap_or(2),
            },
            KernelFamily::RationalQuadratic => KernelSpec::RationalQuadratic { c },
            KernelFamily::Multiquadric => KernelSpec::Multiquadric { c },
            KernelFamily::Sigmoid => KernelSpec::Sigmoid { a, c },
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<KernelSpec> for KernelConfig {
    fn from(spec: KernelSpec) -> Self {
        let mut cfg = KernelConfig::new(spec.family());
        match spec {
            KernelSpec::Gaussian { gamma } => cfg.gamma = Some(gamma),
            KernelSpec::Linear => {}
            KernelSpec::Polynomial { a, c, d } => {
                cfg.a = Some(a);
                cfg.c = Some(c);
                cfg.d = Some(d);
            }
            KernelSpec::RationalQuadratic { c } | KernelSpec::Multiquadric { c } => {
                cfg.c = Some(c)
            }
            KernelSpec::Sigmoid { a, c } => {
                cfg.a = Some(a);
                cfg.c = Some(c);
            }
        }
        cfg
    }
}

impl FromStr for KernelConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: String| Error::KernelSpec {
            spec: s.to_string(),
            reason,
        };
        let s_trim = s.trim();
        let (family, params) = match s_trim.split_once(':') {
            Some((f, p)) => (f, Some(p)),
            None => (s_trim, None),
        };
        let family: KernelFamily = family.trim().parse().map_err(err)?;
        let mut cfg = KernelConfig::new(family);
        for pair in params.into_iter().flat_map(|p| p.split(',')) {
            let pair = pair.trim();
            if pair.is_empty() {
                continue;
            }
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got {pair:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if !family.allowed_keys().contains(&key) {
                return Err(err(format!("unknown parameter {key:?} for {family}")));
            }
            let number = || {
                value
                    .parse::<f64>()
                    .map_err(|_| err(format!("bad number {value:?} for {key}")))
            };
            match key {
                "gamma" if value.eq_ignore_ascii_case("auto") => cfg.gamma = None,
                "gamma" => cfg.gamma = Some(number()?),
                "a" => cfg.a = Some(number()?),
                "c" => cfg.c = Some(number()?),
                "d" => {
                    cfg.d = Some(
                        value
                            .parse::<u32>()
                            .map_err(|_| err(format!("degree must be a positive integer, got {value:?}")))?,
                    )
                }
                _ => unreachable!("key checked against allowed_keys"),
            }
        }
        if cfg.d == Some(0) {
            return Err(err("degree d must be >= 1".into()));
        }
        // Data-dependent defaults get placeholder values so the explicit ones
        // can be range-checked now rather than at training time.
        let probe = KernelConfig {
            gamma: Some(cfg.gamma.unwrap_or(1.0)),
            a: Some(cfg.a.unwrap_or(1.0)),
            ..cfg
        };
        probe
            .resolve(&DenseMatrix::zeros(1, 1))
            .map_err(|e| err(e.to_string()))?;
        Ok(cfg)
    }
}

impl fmt::Display for KernelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        let mut parts = Vec::new();
        if self.family == KernelFamily::Gaussian {
            parts.push(match self.gamma {
                Some(g) => format!("gamma={g:e}"),
                None => "gamma=auto".to_string(),
            });
        }
        if let Some(a) = self.a {
            parts.push(format!("a={a:e}"));
        }
        if let Some(c) = self.c {
            parts.push(format!("c={c:e}"));
        }
        if let Some(d) = self.d {
            parts.push(format!("d={d}"));
        }
        if !parts.is_empty() {
            write!(f, ":{}", parts.join(","))?;
        }
        Ok(())
    }
}

/// Symmetric `n × n` kernel similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    values: DenseMatrix,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    pub fn as_matrix(&self) -> &DenseMatrix {
        &self.values
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.values
    }
}

fn check_vector(v: &[f64], what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn kernel_value(u: &[f64], v: &[f64], spec: &KernelSpec) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    spec.validate()?;
    check_vector(u, "kernel input")?;
    check_vector(v, "kernel input")?;
    Ok(spec.eval(u, v))
}

/// `values[i][j] = K(row_i, row_j)`; the upper triangle is computed and mirrored.
pub fn gram_matrix(rows: &DenseMatrix, spec: &KernelSpec) -> Result<GramMatrix> {
    let n = rows.rows();
    if n == 0 {
        return Err(Error::InsufficientFrames {
            needed: 1,
            available: 0,
        });
    }
    spec.validate()?;
    check_vector(rows.as_slice(), "gram input")?;
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| spec.eval(rows.row(i), rows.row(j))).collect())
        .collect();
    let mut values = DenseMatrix::zeros(n, n);
    for (i, tail) in upper.iter().enumerate() {
        for (off, &k) in tail.iter().enumerate() {
            values.set(i, i + off, k);
            values.set(i + off, i, k);
        }
    }
    Ok(GramMatrix { values })
}

/// `[K(x, row_1), …, K(x, row_n)]`.
pub fn kernel_vector(x: &[f64], rows: &DenseMatrix, spec: &KernelSpec) -> Result<Vec<f64>> {
    if x.len() != rows.cols() {
        return Err(Error::DimensionMismatch {
            expected: rows.cols(),
            found: x.len(),
        });
    }
    spec.validate()?;
    check_vector(x, "kernel input")?;
    Ok(kernel_vector_unchecked(x, rows, spec))
}

pub(crate) fn kernel_vector_unchecked(x: &[f64], rows: &DenseMatrix, spec: &KernelSpec) -> Vec<f64> {
    (0..rows.rows())
        .into_par_iter()
        .map(|i| spec.eval(x, rows.row(i)))
        .collect()
}

/// Median of the pairwise squared distances `‖row_i − row_j‖²`, `i < j`.
pub fn median_bandwidth(rows: &DenseMatrix) -> Result<f64> {
    let n = rows.rows();
    if n < 2 {
        return Err(Error::InsufficientFrames {
            needed: 2,
            available: n,
        });
    }
    let mut d2: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| (i + 1..n).map(move |j| squared_distance(rows.row(i), rows.row(j))))
        .collect();
    if d2.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("bandwidth input"));
    }
    d2.sort_by(f64::total_cmp);
    let m = d2.len();
    let median = if m % 2 == 1 {
        d2[m / 2]
    } else {
        0.5 * (d2[m / 2 - 1] + d2[m / 2])
    };
    if median <= 0.0 {
        return Err(Error::DegenerateSequence);
    }
    Ok(median)
}
