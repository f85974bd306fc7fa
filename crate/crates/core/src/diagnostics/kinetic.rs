//! Velocity-truncated moments and level-set bands of the kinetic density.

use crate::error::{Error, Result};
use crate::field::{FluidField, KineticField};
use crate::grid::PhaseGrid;
use crate::vlasov::vlasov_step;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentKind {
    Density,
    Momentum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedMoment {
    /// ∫ f·(1 or v)·1_{|v| ≤ L} dv per x-cell.
    pub values: Vec<f64>,
    /// ∫∫ f v² 1_{|v| > L}
    pub tail_second_moment: f64,
}

pub fn truncated_moment(f: &KineticField, grid: &PhaseGrid, l: f64, which: MomentKind) -> Result<TruncatedMoment> {
    if !(l > 0.0) {
        return Err(Error::domain("truncation level L must be positive"));
    }
    let vs = grid.v_centers();
    let dv = grid.dv();
    let mut tail = 0.0;
    let values = (0..grid.nx)
        .map(|i| {
            let mut s = 0.0;
            for (fv, &v) in f.row(i).iter().zip(&vs) {
                if v.abs() <= l {
                    s += match which {
                        MomentKind::Density => *fv,
                        MomentKind::Momentum => fv * v,
                    };
                } else {
                    tail += fv * v * v;
                }
            }
            s * dv
        })
        .collect();
    Ok(TruncatedMoment {
        values,
        tail_second_moment: tail * dv * grid.dx(),
    })
}

/// Bands `1_{k ≤ f < k+1}·f` for k < k_max, then the remainder `1_{f ≥ k_max}·f`.
pub fn level_set_decomposition(f: &KineticField, k_max: usize) -> Result<Vec<KineticField>> {
    level_set_decomposition_scaled(f, k_max, 1.0)
}

/// As [`level_set_decomposition`] with band edges `k·scale`.
pub fn level_set_decomposition_scaled(f: &KineticField, k_max: usize, scale: f64) -> Result<Vec<KineticField>> {
    if k_max < 1 {
        return Err(Error::domain("k_max must be at least 1"));
    }
    if !(scale > 0.0) {
        return Err(Error::domain("band scale must be positive"));
    }
    let mut pieces: Vec<KineticField> = (0..=k_max)
        .map(|_| KineticField {
            nx: f.nx,
            nv: f.nv,
            data: vec![0.0; f.data.len()],
        })
        .collect();
    for (idx, &val) in f.data.iter().enumerate() {
        let band = ((val / scale).floor().max(0.0) as usize).min(k_max);
        pieces[band].data[idx] = val;
    }
    Ok(pieces)
}

pub fn band_masses(pieces: &[KineticField], grid: &PhaseGrid) -> Vec<f64> {
    pieces.iter().map(|p| p.mass(grid)).collect()
}

/// L¹ masses of the bands of `f` before and after one kinetic step.
#[derive(Clone, Debug, PartialEq)]
pub struct BandTransport {
    pub initial: Vec<f64>,
    /// Each band advanced on its own by the step.
    pub transported: Vec<f64>,
    /// Bands of the advanced field with edges rescaled by e^{dt}.
    pub rebanded: Vec<f64>,
    /// max over bands of |transported - initial| / ‖f‖_{L¹}.
    pub max_transport_error: f64,
    /// max over bands of |rebanded - initial| / ‖f‖_{L¹}.
    pub max_reband_error: f64,
    /// |Σ bands - ‖f‖_{L¹}| / ‖f‖_{L¹}, before the step.
    pub partition_error: f64,
}

/// Splits `f` into bands of width `scale`, advances each with one
/// kinetic step and compares masses.
pub fn band_transport_check(
    f: &KineticField,
    u: &FluidField,
    dt: f64,
    grid: &PhaseGrid,
    k_max: usize,
    scale: f64,
) -> Result<BandTransport> {
    let pieces = level_set_decomposition_scaled(f, k_max, scale)?;
    let initial = band_masses(&pieces, grid);
    let total = f.mass(grid);
    if total <= 0.0 {
        return Err(Error::domain("band transport needs a field with positive mass"));
    }
    let transported: Vec<f64> = pieces.iter().map(|p| vlasov_step(p, u, dt, grid).mass(grid)).collect();
    let advanced = vlasov_step(f, u, dt, grid);
    let rebanded = band_masses(
        &level_set_decomposition_scaled(&advanced, k_max, scale * dt.exp())?,
        grid,
    );
    let max_err = |other: &[f64]| {
        initial
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs() / total)
            .fold(0.0, f64::max)
    };
    let partition: f64 = pieces.iter().map(|p| p.data.iter().sum::<f64>()).sum::<f64>() * grid.dx() * grid.dv();
    Ok(BandTransport {
        max_transport_error: max_err(&transported),
        max_reband_error: max_err(&rebanded),
        partition_error: (partition - total).abs() / total,
        initial,
        transported,
        rebanded,
    })
}
