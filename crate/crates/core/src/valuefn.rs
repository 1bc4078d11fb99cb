//! Piecewise exponential-sum value functions V(Δk) and the characteristic
//! roots of the regional ODEs.

use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};
use crate::model::ContestParams;
use crate::numeric::solve_dense;

/// Roots of the characteristic equations.
///
/// `xi_plus`/`xi_minus` solve r + λ = πξ + ½σ²ξ² (one agent risky), `eta`
/// solves r + λ = σ²η² (both risky), with λ = λ̄ + λ̲.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharRoots {
    pub xi_plus: f64,
    pub xi_minus: f64,
    pub eta: f64,
}

pub fn char_roots(params: &ContestParams) -> Result<CharRoots> {
    params.validate_structure()?;
    let rl = params.r + params.hazard_total();
    let s2 = params.sigma * params.sigma;
    let disc = (params.pi * params.pi + 2.0 * rl * s2).sqrt();
    // Each root computed in the form free of cancellation; the other via Vieta.
    let (xi_plus, xi_minus) = if params.pi >= 0.0 {
        let xm = (-params.pi - disc) / s2;
        (-2.0 * rl / (s2 * xm), xm)
    } else {
        let xp = (-params.pi + disc) / s2;
        (xp, -2.0 * rl / (s2 * xp))
    };
    Ok(CharRoots {
        xi_plus,
        xi_minus,
        eta: rl.sqrt() / params.sigma,
    })
}

impl CharRoots {
    /// Largest rate magnitude; bounds the overflow-safe range of Δk.
    pub fn max_rate(&self) -> f64 {
        self.xi_plus.abs().max(self.xi_minus.abs()).max(self.eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub rate: f64,
}

/// `constant + Σ coef·exp(rate·Δk)` on `[lower, upper)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lower: f64,
    pub upper: f64,
    pub constant: f64,
    pub terms: Vec<Term>,
}

impl Region {
    fn eval(&self, dk: f64, order: u32) -> f64 {
        let sum: f64 = self
            .terms
            .iter()
            .map(|t| t.coef * t.rate.powi(order as i32) * (t.rate * dk).exp())
            .sum();
        if order == 0 {
            self.constant + sum
        } else {
            sum
        }
    }
}

/// Layout of one region before its coefficients are known.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub lower: f64,
    pub upper: f64,
    pub constant: f64,
    pub rates: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseValueFunction {
    pub regions: Vec<Region>,
    /// Open interval (−k*_i, k*_j).
    pub domain: (f64, f64),
}

impl PiecewiseValueFunction {
    /// Fits the coefficients of a tiling of second-order regions from
    /// `V(lower end) = left_value`, `V(upper end) = right_value` and C⁰/C¹
    /// continuity at every interior breakpoint.
    pub fn fit(specs: &[RegionSpec], left_value: f64, right_value: f64) -> Result<Self> {
        if specs.is_empty() {
            return Err(ContestError::Domain("no regions".into()));
        }
        for pair in specs.windows(2) {
            if pair[0].upper != pair[1].lower {
                return Err(ContestError::Domain("regions must tile the domain".into()));
            }
        }
        let n = 2 * specs.len();
        // Terms are parametrised as c̃·exp(rate·(x − anchor)) with the anchor on
        // the region end where the exponential is largest, so every matrix
        // entry is at most one in magnitude.
        let anchor = |spec: &RegionSpec, rate: f64| if rate > 0.0 { spec.upper } else { spec.lower };
        let row = |ri: usize, x: f64, order: i32| -> Vec<f64> {
            let mut r = vec![0.0; n];
            let spec = &specs[ri];
            for (q, &rate) in spec.rates.iter().enumerate() {
                r[2 * ri + q] = rate.powi(order) * (rate * (x - anchor(spec, rate))).exp();
            }
            r
        };
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        let first = &specs[0];
        let last = specs.last().unwrap();
        a.push(row(0, first.lower, 0));
        b.push(left_value - first.constant);
        a.push(row(specs.len() - 1, last.upper, 0));
        b.push(right_value - last.constant);
        for ri in 0..specs.len() - 1 {
            let x = specs[ri].upper;
            for order in 0..2 {
                let left = row(ri, x, order);
                let right = row(ri + 1, x, order);
                a.push(left.iter().zip(&right).map(|(l, r)| l - r).collect());
                b.push(if order == 0 {
                    specs[ri + 1].constant - specs[ri].constant
                } else {
                    0.0
                });
            }
        }
        let scaled = solve_dense(a, b)?;
        let regions = specs
            .iter()
            .enumerate()
            .map(|(ri, spec)| Region {
                lower: spec.lower,
                upper: spec.upper,
                constant: spec.constant,
                terms: spec
                    .rates
                    .iter()
                    .enumerate()
                    .map(|(q, &rate)| Term {
                        coef: scaled[2 * ri + q] * (-rate * anchor(spec, rate)).exp(),
                        rate,
                    })
                    .collect(),
            })
            .collect();
        Ok(PiecewiseValueFunction {
            regions,
            domain: (first.lower, last.upper),
        })
    }

    /// Constant function on a single region; handy for plumbing tests.
    pub fn constant(value: f64, lower: f64, upper: f64) -> Self {
        PiecewiseValueFunction {
            regions: vec![Region {
                lower,
                upper,
                constant: value,
                terms: Vec::new(),
            }],
            domain: (lower, upper),
        }
    }

    /// `order`-th derivative at `dk`, strictly inside the domain. At an
    /// interior breakpoint the region starting there is used (right limit).
    pub fn eval(&self, dk: f64, order: u32) -> Result<f64> {
        if order > 3 {
            return Err(ContestError::Domain(format!("derivative order {order} > 3")));
        }
        if !(dk > self.domain.0 && dk < self.domain.1) {
            return Err(ContestError::Domain(format!(
                "Δk = {dk} outside ({}, {})",
                self.domain.0, self.domain.1
            )));
        }
        Ok(self.region_at(dk).eval(dk, order))
    }

    /// One-sided limit at the lower (`Side::Lower`) or upper end of the domain.
    pub fn boundary_limit(&self, side: Side, order: u32) -> f64 {
        match side {
            Side::Lower => self.regions[0].eval(self.domain.0, order),
            Side::Upper => self.regions.last().unwrap().eval(self.domain.1, order),
        }
    }

    /// Left limit at an interior point (uses the region ending there).
    pub fn left_limit(&self, dk: f64, order: u32) -> Result<f64> {
        if !(dk > self.domain.0 && dk <= self.domain.1) {
            return Err(ContestError::Domain(format!("Δk = {dk} outside domain")));
        }
        let region = self
            .regions
            .iter()
            .find(|r| dk > r.lower && dk <= r.upper)
            .unwrap();
        Ok(region.eval(dk, order))
    }

    fn region_at(&self, dk: f64) -> &Region {
        self.regions
            .iter()
            .find(|r| dk >= r.lower && dk < r.upper)
            .unwrap_or_else(|| self.regions.last().unwrap())
    }

    /// Interior breakpoints between regions.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.regions.iter().skip(1).map(|r| r.lower).collect()
    }

    /// Largest C⁰ and C¹ jumps over the interior breakpoints.
    pub fn continuity_jumps(&self) -> (f64, f64) {
        self.regions
            .windows(2)
            .map(|w| {
                let x = w[0].upper;
                (
                    (w[0].eval(x, 0) - w[1].eval(x, 0)).abs(),
                    (w[0].eval(x, 1) - w[1].eval(x, 1)).abs(),
                )
            })
            .fold((0.0, 0.0), |(a, b), (c, d)| (f64::max(a, c), f64::max(b, d)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}
