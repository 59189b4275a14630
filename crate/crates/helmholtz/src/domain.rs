//! Domains and boundary conditions of the homogeneous problem.

use crate::error::{Error, Result};

/// Boundary condition pair at the two ends of an interval (left/right), or
/// periodic identification. On rectangles only full Dirichlet is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// Dirichlet at both ends.
    DD,
    /// Neumann at x = -a/2, Dirichlet at x = +a/2.
    ND,
    /// Dirichlet at x = -a/2, Neumann at x = +a/2.
    DN,
    /// Neumann at both ends.
    NN,
    /// Periodic.
    PP,
}

impl BoundaryCondition {
    /// True exactly when the homogeneous spectrum contains an eigenvalue zero
    /// (constant eigenfunction): Neumann and periodic conditions.
    pub fn has_zero_mode(self) -> bool {
        matches!(self, BoundaryCondition::NN | BoundaryCondition::PP)
    }

    /// Lower-case tag used by the CLI and in file headers.
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryCondition::DD => "dd",
            BoundaryCondition::ND => "nd",
            BoundaryCondition::DN => "dn",
            BoundaryCondition::NN => "nn",
            BoundaryCondition::PP => "pp",
        }
    }

    /// Parse the CLI tag (dd|nd|dn|nn|pp).
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dd" => Ok(BoundaryCondition::DD),
            "nd" => Ok(BoundaryCondition::ND),
            "dn" => Ok(BoundaryCondition::DN),
            "nn" => Ok(BoundaryCondition::NN),
            "pp" => Ok(BoundaryCondition::PP),
            other => Err(Error::Config(format!("unknown boundary condition '{other}'"))),
        }
    }
}

/// Computational domain, centered on the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// Interval x in (-a/2, a/2).
    Interval { a: f64 },
    /// Rectangle (x, y) in (-a/2, a/2) x (-b/2, b/2).
    Rectangle { a: f64, b: f64 },
}

impl Domain {
    pub fn interval(a: f64) -> Self {
        Domain::Interval { a }
    }

    pub fn rectangle(a: f64, b: f64) -> Self {
        Domain::Rectangle { a, b }
    }

    /// Length of the interval, or the rectangle side along x.
    pub fn side_a(&self) -> f64 {
        match *self {
            Domain::Interval { a } => a,
            Domain::Rectangle { a, .. } => a,
        }
    }

    /// Rectangle side along y, if two-dimensional.
    pub fn side_b(&self) -> Option<f64> {
        match *self {
            Domain::Interval { .. } => None,
            Domain::Rectangle { b, .. } => Some(b),
        }
    }

    pub fn is_interval(&self) -> bool {
        matches!(self, Domain::Interval { .. })
    }

    /// V_Omega: a for intervals, a*b for rectangles.
    pub fn volume(&self) -> f64 {
        match *self {
            Domain::Interval { a } => a,
            Domain::Rectangle { a, b } => a * b,
        }
    }

    /// Check a 1D coordinate against the x-extent.
    pub fn check_x(&self, x: f64) -> Result<()> {
        let half = self.side_a() / 2.0;
        if x.abs() <= half + 1e-12 {
            Ok(())
        } else {
            Err(Error::OutOfDomain { coord: x, limit: half })
        }
    }

    /// Check a y coordinate against the rectangle's y-extent.
    pub fn check_y(&self, y: f64) -> Result<()> {
        let half = match self.side_b() {
            Some(b) => b / 2.0,
            None => return Err(Error::UnsupportedBoundary { op: "2D coordinate on an interval" }),
        };
        if y.abs() <= half + 1e-12 {
            Ok(())
        } else {
            Err(Error::OutOfDomain { coord: y, limit: half })
        }
    }
}
