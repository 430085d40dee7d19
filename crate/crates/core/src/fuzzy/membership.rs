use super::FuzzyError;

/// Piecewise-linear membership function given by its breakpoints.
///
/// Between two adjacent breakpoints the degree is the linear interpolation
/// of their degrees. The first and last abscissae are the bounds of the
/// owning variable's domain.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipFunction {
    points: Vec<(f64, f64)>,
}

impl MembershipFunction {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, FuzzyError> {
        if points.len() < 2 {
            return Err(FuzzyError::InvalidMembership(
                "at least two breakpoints are required".into(),
            ));
        }
        for &(x, mu) in &points {
            if !x.is_finite() || !mu.is_finite() {
                return Err(FuzzyError::InvalidMembership(format!(
                    "non-finite breakpoint ({x}, {mu})"
                )));
            }
            if !(0.0..=1.0).contains(&mu) {
                return Err(FuzzyError::InvalidMembership(format!(
                    "degree {mu} at x = {x} is outside [0, 1]"
                )));
            }
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(FuzzyError::InvalidMembership(format!(
                    "breakpoints must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn lo(&self) -> f64 {
        self.points[0].0
    }

    pub fn hi(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    /// Degree of membership at `x`. Outside the breakpoint range the end
    /// degrees are held constant.
    pub fn eval(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x <= pts[0].0 {
            return pts[0].1;
        }
        let last = pts[pts.len() - 1];
        if x >= last.0 {
            return last.1;
        }
        // First breakpoint strictly right of x.
        let i = pts.partition_point(|p| p.0 <= x);
        let (x0, y0) = pts[i - 1];
        let (x1, y1) = pts[i];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn max_degree(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> MembershipFunction {
        MembershipFunction::new(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).unwrap()
    }

    #[test]
    fn interpolates_between_breakpoints() {
        let mf = tri();
        assert_eq!(mf.eval(0.0), 0.0);
        assert_eq!(mf.eval(1.0), 1.0);
        assert!((mf.eval(0.25) - 0.25).abs() < 1e-15);
        assert!((mf.eval(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn holds_end_degrees_outside_range() {
        let sh = MembershipFunction::new(vec![(0.0, 1.0), (0.5, 1.0), (1.0, 0.0)]).unwrap();
        assert_eq!(sh.eval(-3.0), 1.0);
        assert_eq!(sh.eval(7.0), 0.0);
    }

    #[test]
    fn rejects_bad_breakpoints() {
        assert!(MembershipFunction::new(vec![(0.0, 0.0)]).is_err());
        assert!(MembershipFunction::new(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(MembershipFunction::new(vec![(0.0, 0.0), (1.0, 1.2)]).is_err());
        assert!(MembershipFunction::new(vec![(0.0, f64::NAN), (1.0, 1.0)]).is_err());
    }
}
