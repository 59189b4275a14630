//! Eigenpairs of the homogeneous negative Laplacian on intervals and
//! rectangles.
//!
//! One-dimensional modes on (-a/2, a/2):
//!
//! * DD: sqrt(2/a) sin(n pi (x + a/2)/a), eps = n^2 pi^2 / a^2
//! * ND: sqrt(2/a) sin((2n-1) pi (2x + 3a)/(4a)), eps = (2n-1)^2 pi^2 / (4a^2)
//! * DN: the ND family mirrored, x -> -x
//! * NN: 1/sqrt(a); sqrt(2/a) cos(2n pi x/a); sqrt(2/a) sin((2n-1) pi x/a)
//! * PP: 1/sqrt(a); sqrt(2/a) cos(2n pi x/a); sqrt(2/a) sin(2n pi x/a)
//!
//! NN and PP follow the two-family (n, u) enumeration; `basis_modes` flattens
//! the nonzero modes into ascending-eigenvalue order.

use std::f64::consts::PI;

use crate::domain::{BoundaryCondition, Domain};
use crate::error::{Error, Result};

/// Identifier of a mode within its boundary-condition family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeIndex {
    pub n: usize,
    /// Parity family for NN/PP (1 cosine-type, 2 sine-type); None for
    /// single-family conditions.
    pub u: Option<u8>,
}

/// Normalized eigenfunction of -d^2/dx^2, stored as amp * sin(freq*x + phase).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub bc: BoundaryCondition,
    pub index: ModeIndex,
    pub eigenvalue: f64,
    amp: f64,
    freq: f64,
    phase: f64,
}

impl Mode {
    pub fn eval(&self, x: f64) -> f64 {
        self.amp * (self.freq * x + self.phase).sin()
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        self.amp * self.freq * (self.freq * x + self.phase).cos()
    }

    /// Angular frequency of the oscillation, for quadrature sizing.
    pub fn frequency(&self) -> f64 {
        self.freq.abs()
    }

    pub fn is_zero_mode(&self) -> bool {
        self.eigenvalue == 0.0
    }

    /// Sampled values at a set of points.
    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

/// Eigenpair (n, u) of the negative Laplacian for the given boundary
/// condition on an interval. `u` is required for NN/PP (zero mode: n = 0,
/// u = 1) and must be omitted otherwise.
pub fn mode(bc: BoundaryCondition, domain: &Domain, n: usize, u: Option<u8>) -> Result<Mode> {
    let a = domain.side_a();
    let bad = || Error::UnsupportedIndex { n, u };
    let index = ModeIndex { n, u };
    match bc {
        BoundaryCondition::DD => {
            if n == 0 || u.is_some() {
                return Err(bad());
            }
            let freq = n as f64 * PI / a;
            Ok(Mode {
                bc,
                index,
                eigenvalue: freq * freq,
                amp: (2.0 / a).sqrt(),
                freq,
                phase: n as f64 * PI / 2.0,
            })
        }
        BoundaryCondition::ND | BoundaryCondition::DN => {
            if n == 0 || u.is_some() {
                return Err(bad());
            }
            let k = (2 * n - 1) as f64;
            let freq = k * PI / (2.0 * a);
            let signed = if bc == BoundaryCondition::ND { freq } else { -freq };
            Ok(Mode {
                bc,
                index,
                eigenvalue: freq * freq,
                amp: (2.0 / a).sqrt(),
                freq: signed,
                phase: 3.0 * k * PI / 4.0,
            })
        }
        BoundaryCondition::NN => match (n, u) {
            (0, Some(1)) => Ok(zero_mode_for(bc, a)),
            (n, Some(1)) if n >= 1 => {
                let freq = 2.0 * n as f64 * PI / a;
                Ok(Mode {
                    bc,
                    index,
                    eigenvalue: freq * freq,
                    amp: (2.0 / a).sqrt(),
                    freq,
                    phase: PI / 2.0,
                })
            }
            (n, Some(2)) if n >= 1 => {
                let freq = (2 * n - 1) as f64 * PI / a;
                Ok(Mode {
                    bc,
                    index,
                    eigenvalue: freq * freq,
                    amp: (2.0 / a).sqrt(),
                    freq,
                    phase: 0.0,
                })
            }
            _ => Err(bad()),
        },
        BoundaryCondition::PP => match (n, u) {
            (0, Some(1)) => Ok(zero_mode_for(bc, a)),
            (n, Some(1)) if n >= 1 => {
                let freq = 2.0 * n as f64 * PI / a;
                Ok(Mode {
                    bc,
                    index,
                    eigenvalue: freq * freq,
                    amp: (2.0 / a).sqrt(),
                    freq,
                    phase: PI / 2.0,
                })
            }
            (n, Some(2)) if n >= 1 => {
                let freq = 2.0 * n as f64 * PI / a;
                Ok(Mode {
                    bc,
                    index,
                    eigenvalue: freq * freq,
                    amp: (2.0 / a).sqrt(),
                    freq,
                    phase: 0.0,
                })
            }
            _ => Err(bad()),
        },
    }
}

fn zero_mode_for(bc: BoundaryCondition, a: f64) -> Mode {
    Mode {
        bc,
        index: ModeIndex { n: 0, u: Some(1) },
        eigenvalue: 0.0,
        amp: 1.0 / a.sqrt(),
        freq: 0.0,
        phase: PI / 2.0,
    }
}

/// The constant zero mode 1/sqrt(a) for NN/PP.
pub fn zero_mode(bc: BoundaryCondition, domain: &Domain) -> Option<Mode> {
    bc.has_zero_mode().then(|| zero_mode_for(bc, domain.side_a()))
}

/// The first `count` nonzero modes in ascending eigenvalue order. PP
/// degenerate pairs are ordered cosine (u=1) before sine (u=2).
pub fn basis_modes(bc: BoundaryCondition, domain: &Domain, count: usize) -> Vec<Mode> {
    let mut out = Vec::with_capacity(count);
    match bc {
        BoundaryCondition::DD | BoundaryCondition::ND | BoundaryCondition::DN => {
            for n in 1..=count {
                out.push(mode(bc, domain, n, None).unwrap());
            }
        }
        BoundaryCondition::NN => {
            // Laplacian index k: odd k is the sine family, even k the cosine
            let mut k = 1usize;
            while out.len() < count {
                let m = if k % 2 == 1 {
                    mode(bc, domain, k.div_ceil(2), Some(2)).unwrap()
                } else {
                    mode(bc, domain, k / 2, Some(1)).unwrap()
                };
                out.push(m);
                k += 1;
            }
        }
        BoundaryCondition::PP => {
            let mut n = 1usize;
            while out.len() < count {
                out.push(mode(bc, domain, n, Some(1)).unwrap());
                if out.len() < count {
                    out.push(mode(bc, domain, n, Some(2)).unwrap());
                }
                n += 1;
            }
        }
    }
    out
}

/// Dirichlet product mode on a rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode2D {
    pub x: Mode,
    pub y: Mode,
    pub eigenvalue: f64,
}

impl Mode2D {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.x.eval(x) * self.y.eval(y)
    }
}

/// The `count` lowest Dirichlet product modes of the rectangle, ordered by
/// ascending eigenvalue with (n_x, n_y) lexicographic tie-breaking.
pub fn product_modes(domain: &Domain, count: usize) -> Result<Vec<Mode2D>> {
    let (a, b) = match *domain {
        Domain::Rectangle { a, b } => (a, b),
        Domain::Interval { .. } => {
            return Err(Error::UnsupportedBoundary { op: "product modes on an interval" })
        }
    };
    // enumerate a generous candidate box, then sort
    let cap = count.max(4);
    let nx_hi = ((cap as f64).sqrt() as usize + 2) * 2 * (1.0 + b / a).ceil() as usize + 8;
    let ny_hi = ((cap as f64).sqrt() as usize + 2) * 2 * (1.0 + a / b).ceil() as usize + 8;
    let dx = Domain::interval(a);
    let dy = Domain::interval(b);
    let mut cand = Vec::with_capacity(nx_hi * ny_hi);
    for nx in 1..=nx_hi {
        for ny in 1..=ny_hi {
            let e = (nx as f64 * PI / a).powi(2) + (ny as f64 * PI / b).powi(2);
            cand.push((e, nx, ny));
        }
    }
    cand.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap().then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    cand.truncate(count);
    Ok(cand
        .into_iter()
        .map(|(e, nx, ny)| Mode2D {
            x: mode(BoundaryCondition::DD, &dx, nx, None).unwrap(),
            y: mode(BoundaryCondition::DD, &dy, ny, None).unwrap(),
            eigenvalue: e,
        })
        .collect())
}
