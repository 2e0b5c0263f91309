//! The layer schedule and the constraint system it induces.
//!
//! A schedule splits the bottom half of the ambient cube into `L` pairs of
//! layers. With `denom = 2L + 1`, layer `i` spans `[(1+2i)/denom, (3+2i)/denom]`
//! (as fractions of `n`), a red embedding has already climbed `i/denom` below
//! it and may climb another `1/denom` inside it, and symmetrically for blue.
//! The optimization variables are a skip fraction `c_i` and a slack `h_i` per
//! layer; feasibility of the resulting margin system is what makes the
//! colouring construction go through.

use num_rational::Ratio;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exponent::entropy_log_raw;

pub type Frac = Ratio<i64>;

#[derive(Debug, Error, PartialEq)]
pub enum LayerError {
    #[error("number of layer pairs must be at least 1")]
    EmptySchedule,
    #[error("parameter vector has {got} entries for {want} layers")]
    LengthMismatch { got: usize, want: usize },
    #[error("layer {index}: {reason}")]
    BadRow { index: usize, reason: String },
    #[error("travel budget exceeded: b_0 + sum r_i + sum b_i = {0} > 1")]
    TravelBudget(Frac),
}

/// One pair of layers, all quantities exact fractions of `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerRow {
    pub index: usize,
    pub bottom: Frac,
    pub top: Frac,
    pub red_level: Frac,
    pub red_climb: Frac,
    pub blue_level: Frac,
    pub blue_climb: Frac,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerSchedule {
    rows: Vec<LayerRow>,
}

impl LayerSchedule {
    /// The uniform schedule with `b_0 = r_i = b_i = 1/(2L+1)`.
    pub fn uniform(num_layers: usize) -> Result<Self, LayerError> {
        if num_layers < 1 {
            return Err(LayerError::EmptySchedule);
        }
        let denom = 2 * num_layers as i64 + 1;
        let f = |p: i64| Frac::new(p, denom);
        let rows = (0..num_layers)
            .map(|i| {
                let i64i = i as i64;
                LayerRow {
                    index: i,
                    bottom: f(1 + 2 * i64i),
                    top: f(3 + 2 * i64i),
                    red_level: f(i64i),
                    red_climb: f(1),
                    blue_level: f(2 + i64i),
                    blue_climb: f(1),
                }
            })
            .collect();
        Ok(Self { rows })
    }

    /// A generalized schedule with free climbs. Rows must tile the bottom
    /// half (`top_i = bottom_{i+1}`, last top = 1), satisfy the structural
    /// identities, and stay within the travel budget
    /// `b_0 + sum r_i + sum b_i <= 1`.
    pub fn from_rows(rows: Vec<LayerRow>) -> Result<Self, LayerError> {
        if rows.is_empty() {
            return Err(LayerError::EmptySchedule);
        }
        for (i, row) in rows.iter().enumerate() {
            let bad = |reason: &str| LayerError::BadRow {
                index: i,
                reason: reason.to_string(),
            };
            if row.index != i {
                return Err(bad("index out of order"));
            }
            if row.red_climb <= Frac::zero() || row.blue_climb <= Frac::zero() {
                return Err(bad("climbs must be positive"));
            }
            if row.top != row.red_level + row.blue_level + row.red_climb {
                return Err(bad("top != red_level + blue_level + red_climb"));
            }
            if row.bottom != row.red_level + row.blue_level - row.blue_climb {
                return Err(bad("bottom != red_level + blue_level - blue_climb"));
            }
            if i + 1 < rows.len() && row.top != rows[i + 1].bottom {
                return Err(bad("top does not meet the next layer's bottom"));
            }
        }
        if rows.last().unwrap().top != Frac::one() {
            return Err(LayerError::BadRow {
                index: rows.len() - 1,
                reason: "last top must equal 1".into(),
            });
        }
        let travel = rows[0].bottom
            + rows
                .iter()
                .map(|r| r.red_climb + r.blue_climb)
                .sum::<Frac>();
        if travel > Frac::one() {
            return Err(LayerError::TravelBudget(travel));
        }
        Ok(Self { rows })
    }

    pub fn num_layers(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[LayerRow] {
        &self.rows
    }
}

/// The per-layer optimization variables, as fractions of `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

impl ParamVector {
    pub fn zeros(num_layers: usize) -> Self {
        Self {
            c: vec![0.0; num_layers],
            h: vec![0.0; num_layers],
        }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn check_against(&self, schedule: &LayerSchedule) -> Result<(), LayerError> {
        if self.c.len() != schedule.num_layers() || self.h.len() != schedule.num_layers() {
            return Err(LayerError::LengthMismatch {
                got: self.c.len().max(self.h.len()),
                want: schedule.num_layers(),
            });
        }
        Ok(())
    }

    pub fn within_bounds(&self) -> bool {
        self.c.iter().all(|&c| (0.0..=2.0).contains(&c))
            && self.h.iter().all(|&h| (0.0..=1.0).contains(&h))
    }
}

/// Quantities derived from a schedule and a parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedQuantities {
    /// Ambient dimension per `n`: `N = 2 + 2 * sum c_i`.
    pub ambient: f64,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub topvar: Vec<f64>,
    pub ks_log: Vec<f64>,
    pub kt_log: Vec<f64>,
    pub nt_log: Vec<f64>,
    pub nsect_log: Vec<f64>,
}

/// Signed slack of every constraint instance; positive means satisfied.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMargins {
    pub intersection: Vec<f64>,
    pub probability: Vec<f64>,
    pub room_for_h: Vec<f64>,
    pub t_below_top: Vec<f64>,
    pub subfamily: Vec<f64>,
}

impl ConstraintMargins {
    /// Feasibility as the optimizer sees it.
    pub fn feasible(&self, epsilon: f64) -> bool {
        let ge = |v: &[f64]| v.iter().all(|&m| m >= epsilon);
        ge(&self.intersection) && ge(&self.probability) && ge(&self.room_for_h)
    }

    /// The stronger predicate the certifier enforces.
    pub fn certifiable(&self, epsilon: f64) -> bool {
        self.feasible(epsilon)
            && self.subfamily.iter().all(|&m| m >= epsilon)
            && self.t_below_top.iter().all(|&m| m >= 0.0)
    }

    /// Worst violation over the optimizer's constraint families.
    pub fn worst(&self) -> f64 {
        self.intersection
            .iter()
            .chain(&self.probability)
            .chain(&self.room_for_h)
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }
}

fn frac_to_f64(f: Frac) -> f64 {
    *f.numer() as f64 / *f.denom() as f64
}

pub fn derive(
    schedule: &LayerSchedule,
    params: &ParamVector,
) -> Result<DerivedQuantities, LayerError> {
    params.check_against(schedule)?;
    let num_layers = schedule.num_layers();
    let ambient = 2.0 + 2.0 * params.c.iter().sum::<f64>();

    let mut out = DerivedQuantities {
        ambient,
        s: Vec::with_capacity(num_layers),
        t: Vec::with_capacity(num_layers),
        topvar: Vec::with_capacity(num_layers),
        ks_log: Vec::with_capacity(num_layers),
        kt_log: Vec::with_capacity(num_layers),
        nt_log: Vec::with_capacity(num_layers),
        nsect_log: Vec::with_capacity(num_layers),
    };

    let mut c_prefix = 0.0; // sum c_k for k < i
    for (i, row) in schedule.rows().iter().enumerate() {
        let c_i = params.c[i];
        let h_i = params.h[i];
        let red_level = frac_to_f64(row.red_level);
        let red_climb = frac_to_f64(row.red_climb);
        let blue_level = frac_to_f64(row.blue_level);
        let blue_climb = frac_to_f64(row.blue_climb);

        let s = frac_to_f64(row.bottom) + c_prefix + red_climb;
        let t = s + c_i + h_i;
        let topvar = frac_to_f64(row.top) + c_prefix + c_i;

        out.s.push(s);
        out.t.push(t);
        out.topvar.push(topvar);
        out.ks_log.push(entropy_log_raw(1.0 - red_level, red_climb));
        out.kt_log.push(
            entropy_log_raw(blue_level, blue_climb)
                + entropy_log_raw(ambient - topvar - 1.0 + blue_level, h_i),
        );
        out.nt_log.push(entropy_log_raw(ambient - s, t - s));
        out.nsect_log.push(
            entropy_log_raw(red_climb, c_i + h_i)
                + entropy_log_raw(1.0 - red_level - red_climb, c_i + h_i),
        );

        c_prefix += c_i;
    }
    Ok(out)
}

pub fn constraint_margins(
    schedule: &LayerSchedule,
    params: &ParamVector,
) -> Result<ConstraintMargins, LayerError> {
    let derived = derive(schedule, params)?;
    Ok(margins_from_derived(schedule, params, &derived))
}

pub(crate) fn margins_from_derived(
    schedule: &LayerSchedule,
    params: &ParamVector,
    derived: &DerivedQuantities,
) -> ConstraintMargins {
    let num_layers = schedule.num_layers();
    let mut margins = ConstraintMargins {
        intersection: Vec::with_capacity(num_layers),
        probability: Vec::with_capacity(num_layers),
        room_for_h: Vec::with_capacity(num_layers),
        t_below_top: Vec::with_capacity(num_layers),
        subfamily: Vec::with_capacity(num_layers),
    };
    for (i, row) in schedule.rows().iter().enumerate() {
        let c_i = params.c[i];
        let h_i = params.h[i];
        let red_level = frac_to_f64(row.red_level);
        let red_climb = frac_to_f64(row.red_climb);
        let blue_level = frac_to_f64(row.blue_level);

        margins.intersection.push(
            red_climb - red_climb * red_climb / (1.0 - red_level) - (c_i + h_i),
        );
        margins
            .probability
            .push(derived.kt_log[i] - derived.nt_log[i]);
        margins
            .room_for_h
            .push(derived.ambient - derived.topvar[i] - 1.0 + blue_level - h_i);
        margins.t_below_top.push(derived.topvar[i] - derived.t[i]);
        margins
            .subfamily
            .push(derived.ks_log[i] - derived.nsect_log[i]);
    }
    margins
}
