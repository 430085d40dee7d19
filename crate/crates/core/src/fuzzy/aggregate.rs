use super::{ClippedOutputSet, FuzzyError, LinguisticVariable, MembershipFunction};

/// Pointwise maximum of clipped output sets, kept as an exact piecewise-linear
/// function over the output domain.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedOutput {
    points: Vec<(f64, f64)>,
}

fn clipped(mf: &MembershipFunction, h: f64, x: f64) -> f64 {
    mf.eval(x).min(h)
}

impl AggregatedOutput {
    /// Wraps a precomputed envelope. Abscissae must be non-decreasing.
    pub fn from_points(points: Vec<(f64, f64)>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0].0 <= w[1].0));
        Self { points }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pts = &self.points;
        if pts.is_empty() || x < pts[0].0 || x > pts[pts.len() - 1].0 {
            return 0.0;
        }
        let i = pts.partition_point(|p| p.0 <= x);
        if i == pts.len() {
            return pts[i - 1].1;
        }
        let (x0, y0) = pts[i - 1];
        let (x1, y1) = pts[i];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Integral of the envelope.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
            .sum()
    }

    /// Centre of gravity, integrating each linear piece in closed form.
    pub fn centroid(&self) -> Result<f64, FuzzyError> {
        let mut area = 0.0;
        let mut moment = 0.0;
        for w in self.points.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            let dx = x1 - x0;
            area += 0.5 * (y0 + y1) * dx;
            moment += dx / 6.0 * (y0 * (2.0 * x0 + x1) + y1 * (x0 + 2.0 * x1));
        }
        if area <= 0.0 {
            return Err(FuzzyError::ZeroMass);
        }
        Ok(moment / area)
    }

    /// Smallest interval outside which the envelope is zero.
    pub fn support(&self) -> Option<(f64, f64)> {
        let pts = &self.points;
        let first = pts.windows(2).position(|w| w[0].1 > 0.0 || w[1].1 > 0.0)?;
        let last = pts.windows(2).rposition(|w| w[0].1 > 0.0 || w[1].1 > 0.0)?;
        Some((pts[first].0, pts[last + 1].0))
    }
}

/// Builds the max envelope of the given clipped sets over `output`'s domain.
///
/// The envelope is exact: it is sampled at every membership breakpoint, at
/// every point where a term crosses its clip height, and at every crossing
/// between two clipped sets, and is linear in between.
pub fn aggregate(
    clipped_sets: &[ClippedOutputSet],
    output: &LinguisticVariable,
) -> Result<AggregatedOutput, FuzzyError> {
    if clipped_sets.is_empty() {
        return Err(FuzzyError::EmptyRuleFiring);
    }
    let parts: Vec<(&MembershipFunction, f64)> = clipped_sets
        .iter()
        .map(|c| (&output.terms()[c.term].mf, c.height.clamp(0.0, 1.0)))
        .collect();
    Ok(envelope(&parts, output.domain()))
}

pub(crate) fn envelope(parts: &[(&MembershipFunction, f64)], domain: (f64, f64)) -> AggregatedOutput {
    let (lo, hi) = domain;
    let mut xs = vec![lo, hi];
    for &(mf, h) in parts {
        for w in mf.points().windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            xs.push(x0);
            if (y0 - h) * (y1 - h) < 0.0 {
                xs.push(x0 + (h - y0) * (x1 - x0) / (y1 - y0));
            }
        }
        xs.push(mf.hi());
    }
    xs.retain(|x| (lo..=hi).contains(x));
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    // Every clipped set is linear between neighbouring entries of `xs`, so
    // the only remaining kinks are where two of them cross.
    let mut crossings = Vec::new();
    for w in xs.windows(2) {
        let (a, b) = (w[0], w[1]);
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                let da = clipped(parts[i].0, parts[i].1, a) - clipped(parts[j].0, parts[j].1, a);
                let db = clipped(parts[i].0, parts[i].1, b) - clipped(parts[j].0, parts[j].1, b);
                if da * db < 0.0 {
                    let x = a + (b - a) * da / (da - db);
                    if x > a && x < b {
                        crossings.push(x);
                    }
                }
            }
        }
    }
    xs.extend(crossings);
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let points = xs
        .into_iter()
        .map(|x| {
            let y = parts
                .iter()
                .map(|&(mf, h)| clipped(mf, h, x))
                .fold(0.0, f64::max);
            (x, y)
        })
        .collect();
    AggregatedOutput { points }
}

pub fn defuzzify_centroid(agg: &AggregatedOutput) -> Result<f64, FuzzyError> {
    agg.centroid()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::Term;

    fn mf(pts: &[(f64, f64)]) -> MembershipFunction {
        MembershipFunction::new(pts.to_vec()).unwrap()
    }

    fn midpoint_centroid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let dx = (hi - lo) / n as f64;
        let (mut a, mut m) = (0.0, 0.0);
        for k in 0..n {
            let x = lo + (k as f64 + 0.5) * dx;
            let y = f(x);
            a += y;
            m += x * y;
        }
        m / a
    }

    #[test]
    fn symmetric_triangle_centroid_is_its_apex_at_any_height() {
        let t = mf(&[(0.0, 0.0), (0.2, 0.0), (0.5, 1.0), (0.8, 0.0), (1.0, 0.0)]);
        for h in [0.1, 0.35, 0.9, 1.0] {
            let agg = envelope(&[(&t, h)], (0.0, 1.0));
            assert!((agg.centroid().unwrap() - 0.5).abs() < 1e-12, "h = {h}");
        }
    }

    #[test]
    fn rectangle_centroid_is_its_midpoint() {
        let agg = AggregatedOutput::from_points(vec![(0.2, 0.0), (0.2, 0.4), (0.7, 0.4), (0.7, 0.0)]);
        assert!((agg.centroid().unwrap() - 0.45).abs() < 1e-12);
        assert!((agg.area() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn zero_envelope_has_no_centroid() {
        let t = mf(&[(0.0, 0.0), (1.0, 1.0)]);
        let agg = envelope(&[(&t, 0.0)], (0.0, 1.0));
        assert_eq!(agg.centroid(), Err(FuzzyError::ZeroMass));
    }

    #[test]
    fn disjoint_sets_add_their_areas() {
        let a = mf(&[(0.0, 0.0), (0.1, 1.0), (0.2, 0.0), (1.0, 0.0)]);
        let b = mf(&[(0.0, 0.0), (0.6, 0.0), (0.7, 1.0), (0.8, 0.0), (1.0, 0.0)]);
        let whole = envelope(&[(&a, 0.6), (&b, 0.3)], (0.0, 1.0));
        let pa = envelope(&[(&a, 0.6)], (0.0, 1.0));
        let pb = envelope(&[(&b, 0.3)], (0.0, 1.0));
        assert!((whole.area() - pa.area() - pb.area()).abs() < 1e-14);
        // Clipped triangle of base 0.2 at height 0.6: 0.2*0.6 - 0.1*0.6*0.6.
        assert!((pa.area() - (0.12 - 0.036)).abs() < 1e-14);
    }

    #[test]
    fn overlapping_sets_match_dense_integration() {
        let a = mf(&[(0.0, 0.0), (0.1, 0.0), (0.4, 1.0), (0.6, 0.0), (1.0, 0.0)]);
        let b = mf(&[(0.0, 0.0), (0.3, 0.0), (0.5, 1.0), (0.9, 0.0), (1.0, 0.0)]);
        let parts = [(&a, 0.8), (&b, 0.5)];
        let agg = envelope(&parts, (0.0, 1.0));
        let oracle = midpoint_centroid(
            |x| parts.iter().map(|&(m, h)| m.eval(x).min(h)).fold(0.0, f64::max),
            0.0,
            1.0,
            200_000,
        );
        assert!((agg.centroid().unwrap() - oracle).abs() < 1e-7);
    }

    #[test]
    fn aggregate_rejects_empty_input() {
        let out = LinguisticVariable::new(
            "out",
            (0.0, 1.0),
            vec![Term {
                label: "x".into(),
                mf: mf(&[(0.0, 1.0), (1.0, 1.0)]),
            }],
        )
        .unwrap();
        assert_eq!(aggregate(&[], &out), Err(FuzzyError::EmptyRuleFiring));
    }

    #[test]
    fn support_brackets_nonzero_mass() {
        let t = mf(&[(0.0, 0.0), (0.3, 0.0), (0.5, 1.0), (0.6, 0.0), (1.0, 0.0)]);
        let agg = envelope(&[(&t, 0.5)], (0.0, 1.0));
        assert_eq!(agg.support(), Some((0.3, 0.6)));
    }
}
