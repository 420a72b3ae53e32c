use std::path::Path;

use crate::codec::{self, Reader, Writer};
use crate::error::{Error, Result};
use crate::frameio::{center, check_geometry, Frame, FrameSequence, Geometry};
use crate::solver::{pinv_solve, svd, DenseMatrix, SpdFactorization};

pub const LDS_MAGIC: &[u8; 4] = b"LDS1";

/// Ridge used for the transition fit when the state matrix is rank deficient.
const RANK_DEFICIENT_RIDGE: f64 = 1e-12;

/// Deterministic linear dynamical system: `x_{l+1} = A x_l`, `frame_l = C x_l + mean`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdsModel {
    geometry: Geometry,
    /// `D × n` observation matrix with orthonormal columns.
    c_map: DenseMatrix,
    /// `n × n` state transition.
    a_dyn: DenseMatrix,
    x0: Vec<f64>,
    temporal_mean: Vec<f64>,
}

pub fn lds_train(seq: &FrameSequence, state_dim: usize) -> Result<LdsModel> {
    let n_frames = seq.len();
    let max = n_frames.saturating_sub(1).min(seq.geometry().dim());
    if state_dim == 0 || state_dim > max {
        return Err(Error::StateDimOutOfRange { n: state_dim, max });
    }
    let centered = center(seq)?;
    let m = centered.centered();
    if m.as_slice().iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateSequence);
    }
    // Rows of `m` are frames, so the right singular vectors span frame space.
    let decomposition = svd(m)?;
    let d = m.cols();
    let mut c_map = DenseMatrix::zeros(d, state_dim);
    for i in 0..d {
        c_map.row_mut(i).copy_from_slice(&decomposition.v.row(i)[..state_dim]);
    }

    let states = m.matmul(&c_map)?;
    let prev = DenseMatrix::new(
        n_frames - 1,
        state_dim,
        states.as_slice()[..(n_frames - 1) * state_dim].to_vec(),
    )?;
    let next = DenseMatrix::new(
        n_frames - 1,
        state_dim,
        states.as_slice()[state_dim..].to_vec(),
    )?;
    let full_rank = svd(&prev)?.rank(1e-10) == state_dim;
    let lambda = if full_rank && plain_solve_ok(&prev) {
        0.0
    } else {
        RANK_DEFICIENT_RIDGE
    };
    // prev · β ≈ next, so A = βᵀ.
    let a_dyn = pinv_solve(&prev, &next, lambda)?.transpose();

    Ok(LdsModel {
        geometry: seq.geometry(),
        c_map,
        a_dyn,
        x0: states.row(0).to_vec(),
        temporal_mean: centered.temporal_mean().to_vec(),
    })
}

fn plain_solve_ok(h: &DenseMatrix) -> bool {
    let gram = if h.rows() <= h.cols() {
        h.matmul_transpose(h)
    } else {
        h.transpose_matmul(h)
    };
    gram.and_then(|g| SpdFactorization::new(&g, 0.0))
        .is_ok_and(|f| f.jitter_applied() == 0.0)
}

impl LdsModel {
    pub fn from_parts(
        geometry: Geometry,
        c_map: DenseMatrix,
        a_dyn: DenseMatrix,
        x0: Vec<f64>,
        temporal_mean: Vec<f64>,
    ) -> Result<Self> {
        let n = c_map.cols();
        let shape_ok = c_map.rows() == geometry.dim()
            && a_dyn.rows() == n
            && a_dyn.cols() == n
            && x0.len() == n
            && temporal_mean.len() == geometry.dim()
            && n >= 1;
        if !shape_ok {
            return Err(Error::InvalidParameter(format!(
                "inconsistent LDS shapes for geometry {geometry} and state dimension {n}"
            )));
        }
        Ok(Self {
            geometry,
            c_map,
            a_dyn,
            x0,
            temporal_mean,
        })
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn state_dim(&self) -> usize {
        self.c_map.cols()
    }

    pub fn c_map(&self) -> &DenseMatrix {
        &self.c_map
    }

    pub fn a_dyn(&self) -> &DenseMatrix {
        &self.a_dyn
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn temporal_mean(&self) -> &[f64] {
        &self.temporal_mean
    }

    /// `Cᵀ (frame − mean)`.
    pub fn project(&self, frame: &Frame) -> Result<Vec<f64>> {
        check_geometry(self.geometry, frame.geometry())?;
        let centered: Vec<f64> = frame
            .data()
            .iter()
            .zip(&self.temporal_mean)
            .map(|(v, m)| v - m)
            .collect();
        self.c_map.vec_matmul(&centered)
    }

    /// `C x + mean`.
    pub fn observe(&self, state: &[f64]) -> Result<Frame> {
        let mut data = self.c_map.matmul(&DenseMatrix::new(state.len(), 1, state.to_vec())?)?.into_vec();
        for (v, m) in data.iter_mut().zip(&self.temporal_mean) {
            *v += m;
        }
        Frame::new(self.geometry, data)
    }

    pub fn synthesize(&self, count: usize) -> Result<FrameSequence> {
        if count == 0 {
            return Err(Error::InvalidParameter("synthesis count must be >= 1".into()));
        }
        let mut frames = Vec::with_capacity(count);
        let mut x = self.x0.clone();
        for l in 0..count {
            frames.push(self.observe(&x)?);
            if l + 1 < count {
                x = self.a_dyn.matmul(&DenseMatrix::new(x.len(), 1, x)?)?.into_vec();
            }
        }
        FrameSequence::new(frames)
    }

    pub fn save(&self, path: &Path) -> Result<usize> {
        let mut w = Writer::new(LDS_MAGIC);
        w.geometry(self.geometry);
        w.u32(self.state_dim() as u32);
        w.u32(self.geometry.dim() as u32);
        w.f64s(&self.temporal_mean);
        w.f64s(self.c_map.as_slice());
        w.f64s(self.a_dyn.as_slice());
        w.f64s(&self.x0);
        w.finish(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&codec::read_file(path)?)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::open(bytes, LDS_MAGIC)?;
        let geometry = r.geometry()?;
        let n = r.u32("state dim")? as usize;
        let dim = r.u32("dim")? as usize;
        codec::check_dim(geometry, dim)?;
        if n == 0 {
            return Err(Error::Corrupt("state dimension is zero".into()));
        }
        let temporal_mean = r.f64s(dim, "temporal mean")?;
        let c_map = r.matrix(dim, n, "observation matrix")?;
        let a_dyn = r.matrix(n, n, "transition matrix")?;
        let x0 = r.f64s(n, "initial state")?;
        r.finish()?;
        codec::ensure_finite(&temporal_mean, "temporal mean")?;
        codec::ensure_finite(c_map.as_slice(), "observation matrix")?;
        codec::ensure_finite(a_dyn.as_slice(), "transition matrix")?;
        codec::ensure_finite(&x0, "initial state")?;
        Self::from_parts(geometry, c_map, a_dyn, x0, temporal_mean)
    }
}
