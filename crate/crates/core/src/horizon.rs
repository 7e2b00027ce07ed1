//! Finite-horizon stacked operators.
//!
//! Over `t = 0..T` the closed loop is written as one linear map
//! `x = P11 w + P12 u`, with `x ∈ R^{Nn(T+1)}`, `u ∈ R^{NpT}` and
//! `w = [x(0); w̃(0); …; w̃(T−1)]`. Feedback matrices act on the truncated
//! state `C x` (times `0..T−1`) and are stored as a `T × T` grid of `Np × Nn`
//! blocks: row block `t` is the input time, column block `k` the time of the
//! estimate consumed, so causality means block `(t, k)` vanishes for `k > t`.

use crate::error::{Error, Result};
use crate::linalg::{block_diag, kron, unit_lower_solve, Mat, Vector};
use crate::model::{Dims, NetworkTopology, ValidatedInstance};

#[derive(Clone, Debug, PartialEq)]
pub struct HorizonOperators {
    dims: Dims,
    /// `(I − D Ā)^{-1}`
    pub p11: Mat,
    /// `(I − D Ā)^{-1} D B̄`
    pub p12: Mat,
    /// Truncation `[I_{NnT} 0]`.
    pub c: Mat,
    /// `I_{T+1} ⊗ Ã`
    pub abar: Mat,
    /// `[I_T ⊗ B̃; 0]`
    pub bbar: Mat,
    /// Block down-shift.
    pub dshift: Mat,
    /// `E[w]`
    pub mu_w: Vector,
    /// `Cov(w) = blkdg(Σ0, Θ(0), …, Θ(T−1))`
    pub sigma_w: Mat,
    cp12: Mat,
}

pub fn build_horizon(inst: &ValidatedInstance) -> Result<HorizonOperators> {
    let d = inst.dims();
    let (nn, np, t) = (d.mas_state(), d.mas_input(), d.horizon);

    let abar = kron(&Mat::identity(t + 1, t + 1), &inst.a_tilde());
    let mut bbar = Mat::zeros(nn * (t + 1), np * t);
    bbar.view_mut((0, 0), (nn * t, np * t))
        .copy_from(&kron(&Mat::identity(t, t), &inst.b_tilde()));
    let mut dshift = Mat::zeros(nn * (t + 1), nn * (t + 1));
    dshift.view_mut((nn, 0), (nn * t, nn * t)).fill_with_identity();

    let da = &dshift * &abar;
    let p11 = unit_lower_solve(&da, &Mat::identity(nn * (t + 1), nn * (t + 1)));
    let p12 = unit_lower_solve(&da, &(&dshift * &bbar));

    let mut c = Mat::zeros(nn * t, nn * (t + 1));
    c.view_mut((0, 0), (nn * t, nn * t)).fill_with_identity();

    let mut mu_w = Vector::zeros(nn * (t + 1));
    mu_w.rows_mut(0, nn).copy_from(&inst.model().initial_mean);

    let mut blocks = vec![inst.model().initial_cov.clone()];
    for step in 0..t {
        blocks.push(inst.process_noise_block(step)?);
    }
    let sigma_w = block_diag(&blocks);
    let cp12 = &c * &p12;

    Ok(HorizonOperators {
        dims: d,
        p11,
        p12,
        c,
        abar,
        bbar,
        dshift,
        mu_w,
        sigma_w,
        cp12,
    })
}

impl HorizonOperators {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// `C P12`, strictly block lower-triangular.
    pub fn cp12(&self) -> &Mat {
        &self.cp12
    }

    /// `M_i ∈ R^{p × Np}`
    pub fn input_selector(&self, agent: usize) -> Mat {
        input_selector(self.dims, agent)
    }

    /// `I_T ⊗ M_i`
    pub fn horizon_input_selector(&self, agent: usize) -> Mat {
        let t = self.dims.horizon;
        kron(&Mat::identity(t, t), &self.input_selector(agent))
    }

    /// `𝓜_i = I_T ⊗ M_iᵀ M_i`, the projector onto agent `i`'s input rows.
    pub fn agent_projector(&self, agent: usize) -> Mat {
        agent_projector(self.dims, agent)
    }

    pub fn masks(&self, topology: &NetworkTopology) -> SparsityMask {
        SparsityMask::new(self.dims, topology)
    }
}

pub(crate) fn input_selector(d: Dims, agent: usize) -> Mat {
    let p = d.input_dim;
    let mut m = Mat::zeros(p, d.mas_input());
    m.view_mut((0, agent * p), (p, p)).fill_with_identity();
    m
}

pub(crate) fn agent_projector(d: Dims, agent: usize) -> Mat {
    let m = input_selector(d, agent);
    kron(&Mat::identity(d.horizon, d.horizon), &(m.transpose() * m))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskKind {
    /// `F̃`: block `(t, k)` free iff `k ≤ t`.
    Causal,
    /// `F`: causal and, inside a block, row agent `i` may use column agent `j` iff `c_ij = 1`.
    Topology,
}

/// 0/1 patterns of the feedback subspaces, shaped `NpT × NnT`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsityMask {
    pub causal: Mat,
    pub topology: Mat,
}

impl SparsityMask {
    pub fn new(d: Dims, topo: &NetworkTopology) -> Self {
        let (p, n) = (d.input_dim, d.state_dim);
        let (np, nn) = (d.mas_input(), d.mas_state());
        let causal = Mat::from_fn(d.stacked_input(), d.stacked_estimate(), |r, c| {
            if c / nn <= r / np {
                1.0
            } else {
                0.0
            }
        });
        let topology = Mat::from_fn(d.stacked_input(), d.stacked_estimate(), |r, c| {
            let (i, j) = ((r % np) / p, (c % nn) / n);
            if c / nn <= r / np && topo.measures(i, j) {
                1.0
            } else {
                0.0
            }
        });
        Self { causal, topology }
    }

    pub fn get(&self, kind: MaskKind) -> &Mat {
        match kind {
            MaskKind::Causal => &self.causal,
            MaskKind::Topology => &self.topology,
        }
    }
}

/// Entrywise product with a 0/1 mask.
pub fn apply_mask(m: &Mat, mask: &Mat) -> Result<Mat> {
    if m.shape() != mask.shape() {
        return Err(Error::DimensionMismatch(format!(
            "matrix {:?} vs mask {:?}",
            m.shape(),
            mask.shape()
        )));
    }
    Ok(m.component_mul(mask))
}

fn causal_violation(m: &Mat, d: Dims) -> bool {
    let (np, nn) = (d.mas_input(), d.mas_state());
    (0..m.nrows()).any(|r| ((r / np + 1) * nn..m.ncols()).any(|c| m[(r, c)] != 0.0))
}

fn check_feedback_shape(m: &Mat, d: Dims, what: &str) -> Result<()> {
    if m.nrows() != d.stacked_input() || m.ncols() != d.stacked_estimate() {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, expected {}x{}",
            m.nrows(),
            m.ncols(),
            d.stacked_input(),
            d.stacked_estimate()
        )));
    }
    if causal_violation(m, d) {
        return Err(Error::InvalidParameter(format!(
            "{what} has nonzero entries above the causal block diagonal"
        )));
    }
    Ok(())
}

/// Causal feedback matrix `F ∈ R^{NpT × NnT}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlLaw {
    matrix: Mat,
    dims: Dims,
}

impl ControlLaw {
    pub fn new(matrix: Mat, dims: Dims) -> Result<Self> {
        check_feedback_shape(&matrix, dims, "control law")?;
        Ok(Self { matrix, dims })
    }

    pub fn zeros(dims: Dims) -> Self {
        Self {
            matrix: Mat::zeros(dims.stacked_input(), dims.stacked_estimate()),
            dims,
        }
    }

    /// Memoryless law: `F_tt = gain` for every `t`, all other blocks zero.
    pub fn static_gain(gain: &Mat, dims: Dims) -> Result<Self> {
        crate::linalg::check_shape(gain, dims.mas_input(), dims.mas_state(), "static gain")?;
        Self::new(kron(&Mat::identity(dims.horizon, dims.horizon), gain), dims)
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat {
        self.matrix
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// `F_kt ∈ R^{Np × Nn}`: input time `t`, estimate time `k ≤ t`.
    pub fn block(&self, t: usize, k: usize) -> Mat {
        let (np, nn) = (self.dims.mas_input(), self.dims.mas_state());
        self.matrix.view((t * np, k * nn), (np, nn)).into_owned()
    }
}

/// Disturbance-feedback parameter `Φ`, causal like [`ControlLaw`].
#[derive(Clone, Debug, PartialEq)]
pub struct PhiParameter {
    matrix: Mat,
    dims: Dims,
}

impl PhiParameter {
    pub fn new(matrix: Mat, dims: Dims) -> Result<Self> {
        check_feedback_shape(&matrix, dims, "disturbance-feedback parameter")?;
        Ok(Self { matrix, dims })
    }

    pub fn zeros(dims: Dims) -> Self {
        Self {
            matrix: Mat::zeros(dims.stacked_input(), dims.stacked_estimate()),
            dims,
        }
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }
}

/// `h(Φ) = (I + Φ C P12)^{-1} Φ`.
///
/// `Φ C P12` is strictly block lower-triangular, so the inverse is resolved by
/// forward substitution and always exists.
pub fn h_map(phi: &PhiParameter, ops: &HorizonOperators) -> ControlLaw {
    let x = -(phi.matrix() * ops.cp12());
    ControlLaw {
        matrix: unit_lower_solve(&x, phi.matrix()),
        dims: phi.dims,
    }
}

/// `h^{-1}(F) = F (I − C P12 F)^{-1} = (I − F C P12)^{-1} F`.
pub fn h_inverse(law: &ControlLaw, ops: &HorizonOperators) -> PhiParameter {
    let x = law.matrix() * ops.cp12();
    PhiParameter {
        matrix: unit_lower_solve(&x, law.matrix()),
        dims: law.dims,
    }
}
