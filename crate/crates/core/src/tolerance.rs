//! Numerical tolerances shared by the copula and profile checks.

/// Tolerances for grid-based property checks.
///
/// `axiom` absorbs floating-point error of a single copula or profile
/// evaluation; `grid_slack` is added on top for checks that compare values
/// computed along different paths on a discretization grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub axiom: f64,
    pub grid_slack: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        axiom: 1e-9,
        grid_slack: 1e-10,
    };

    pub fn grid(&self) -> f64 {
        self.axiom + self.grid_slack
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Number of knots used by grid-backed profiles and curve exports.
pub const PROFILE_GRID_KNOTS: usize = 1001;
