use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use super::{AssessmentKind, Assessor, FuzzyError};

/// Grid of precomputed inputs. DPB and RC are stored as steps over [0, 1]
/// so that keys can be matched exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupGrid {
    pub dpb_steps: u32,
    pub si_levels: Vec<u8>,
    pub rc_steps: u32,
}

impl Default for LookupGrid {
    fn default() -> Self {
        Self {
            dpb_steps: 10,
            si_levels: (0..=12).collect(),
            rc_steps: 100,
        }
    }
}

impl LookupGrid {
    pub fn dpb_value(&self, i: u32) -> f64 {
        i as f64 / self.dpb_steps as f64
    }

    pub fn rc_value(&self, i: u32) -> f64 {
        i as f64 / self.rc_steps as f64
    }

    pub fn dpb_values(&self) -> Vec<f64> {
        (0..=self.dpb_steps).map(|i| self.dpb_value(i)).collect()
    }

    pub fn rc_values(&self) -> Vec<f64> {
        (0..=self.rc_steps).map(|i| self.rc_value(i)).collect()
    }

    pub fn len(&self) -> usize {
        (self.dpb_steps as usize + 1) * self.si_levels.len() * (self.rc_steps as usize + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points in file order: DPB outermost, RC innermost.
    pub fn keys(&self) -> Vec<(f64, u8, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..=self.dpb_steps {
            for &s in &self.si_levels {
                for j in 0..=self.rc_steps {
                    out.push((self.dpb_value(i), s, self.rc_value(j)));
                }
            }
        }
        out
    }

    fn index(&self, di: u32, si: u8, ri: u32) -> Option<usize> {
        let sp = self.si_levels.iter().position(|&s| s == si)?;
        if di > self.dpb_steps || ri > self.rc_steps {
            return None;
        }
        let nr = self.rc_steps as usize + 1;
        Some((di as usize * self.si_levels.len() + sp) * nr + ri as usize)
    }

    fn step_of(x: f64, steps: u32) -> Option<u32> {
        let k = (x * steps as f64).round();
        if !(0.0..=steps as f64).contains(&k) {
            return None;
        }
        let k = k as u32;
        ((k as f64 / steps as f64 - x).abs() < 1e-9).then_some(k)
    }
}

/// Precomputed reward and punishment values for every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct LookupTable {
    grid: LookupGrid,
    reward: Vec<f64>,
    punishment: Vec<f64>,
}

pub const LOOKUP_HEADER: &str = "dpb,si,rc,reward,punishment,reward_bits,punishment_bits";

impl LookupTable {
    /// Evaluates the assessor on every grid point, in parallel. Each entry
    /// depends only on its key, so the result equals a sequential build.
    pub fn build(assessor: &dyn Assessor, grid: LookupGrid) -> Result<Self, FuzzyError> {
        let keys = grid.keys();
        let pairs: Vec<(f64, f64)> = keys
            .par_iter()
            .map(|&(d, s, r)| {
                Ok((
                    assessor.assess(d, s, r, AssessmentKind::Reward)?,
                    assessor.assess(d, s, r, AssessmentKind::Punishment)?,
                ))
            })
            .collect::<Result<_, FuzzyError>>()?;
        let (reward, punishment) = pairs.into_iter().unzip();
        Ok(Self {
            grid,
            reward,
            punishment,
        })
    }

    pub fn grid(&self) -> &LookupGrid {
        &self.grid
    }

    /// Number of grid rows; each holds a reward and a punishment.
    pub fn len(&self) -> usize {
        self.reward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reward.is_empty()
    }

    pub fn values(&self, kind: AssessmentKind) -> &[f64] {
        match kind {
            AssessmentKind::Reward => &self.reward,
            AssessmentKind::Punishment => &self.punishment,
        }
    }

    /// Exact-key lookup. `None` when the key is not a grid point.
    pub fn get(&self, dpb: f64, si: u8, rc: f64, kind: AssessmentKind) -> Option<f64> {
        let di = LookupGrid::step_of(dpb, self.grid.dpb_steps)?;
        let ri = LookupGrid::step_of(rc, self.grid.rc_steps)?;
        let i = self.grid.index(di, si, ri)?;
        Some(self.values(kind)[i])
    }

    /// Lookup after snapping DPB and RC to the nearest grid step.
    pub fn nearest(&self, dpb: f64, si: u8, rc: f64, kind: AssessmentKind) -> Option<f64> {
        let snap = |x: f64, steps: u32| (x.clamp(0.0, 1.0) * steps as f64).round() as u32;
        let i = self
            .grid
            .index(snap(dpb, self.grid.dpb_steps), si, snap(rc, self.grid.rc_steps))?;
        Some(self.values(kind)[i])
    }

    /// Writes the cache. The decimal columns are for reading; the hex
    /// columns carry the exact bit patterns so a reload is lossless.
    pub fn write_to(&self, mut w: impl Write, header_comment: Option<&str>) -> std::io::Result<()> {
        if let Some(c) = header_comment {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "{LOOKUP_HEADER}")?;
        let mut line = String::new();
        for (k, (d, s, r)) in self.grid.keys().into_iter().enumerate() {
            line.clear();
            let (rw, pu) = (self.reward[k], self.punishment[k]);
            let _ = write!(
                line,
                "{d:.6},{s},{r:.6},{rw:.6},{pu:.6},{:016x},{:016x}",
                rw.to_bits(),
                pu.to_bits()
            );
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self, FuzzyError> {
        let bad = |n: usize, m: &str| FuzzyError::LookupFormat(format!("line {n}: {m}"));
        let mut rows: Vec<(u32, u8, u32, f64, f64)> = Vec::new();
        let mut saw_header = false;
        for (n, line) in r.lines().enumerate() {
            let n = n + 1;
            let line = line.map_err(|e| bad(n, &e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                if !line.starts_with("dpb,si,rc,reward,punishment") {
                    return Err(bad(n, "missing header row"));
                }
                saw_header = true;
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 && f.len() != 7 {
                return Err(bad(n, "expected 5 or 7 columns"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| bad(n, &e.to_string()));
            let bits = |s: &str| {
                u64::from_str_radix(s, 16)
                    .map(f64::from_bits)
                    .map_err(|e| bad(n, &e.to_string()))
            };
            let dpb = num(f[0])?;
            let si: u8 = f[1].parse().map_err(|_| bad(n, "bad severity"))?;
            let rc = num(f[2])?;
            let (rw, pu) = if f.len() == 7 {
                (bits(f[5])?, bits(f[6])?)
            } else {
                (num(f[3])?, num(f[4])?)
            };
            rows.push((
                (dpb * 1e6).round() as u32,
                si,
                (rc * 1e6).round() as u32,
                rw,
                pu,
            ));
        }
        if !saw_header {
            return Err(FuzzyError::LookupFormat("empty lookup file".into()));
        }
        Self::from_rows(rows)
    }

    /// Infers the grid from keys given in micro-units and validates that
    /// the rows form the full product in file order.
    fn from_rows(rows: Vec<(u32, u8, u32, f64, f64)>) -> Result<Self, FuzzyError> {
        let mut dpbs: Vec<u32> = rows.iter().map(|r| r.0).collect();
        let mut sis: Vec<u8> = rows.iter().map(|r| r.1).collect();
        let mut rcs: Vec<u32> = rows.iter().map(|r| r.2).collect();
        for v in [&mut dpbs, &mut rcs] {
            v.sort_unstable();
            v.dedup();
        }
        sis.sort_unstable();
        sis.dedup();
        let steps = |v: &[u32]| -> Result<u32, FuzzyError> {
            let s = v.len().saturating_sub(1) as u32;
            let ok = s > 0
                && v.iter()
                    .enumerate()
                    .all(|(i, &x)| x as u64 * s as u64 == i as u64 * 1_000_000);
            ok.then_some(s)
                .ok_or_else(|| FuzzyError::LookupFormat("keys are not an even grid over [0, 1]".into()))
        };
        let grid = LookupGrid {
            dpb_steps: steps(&dpbs)?,
            si_levels: sis,
            rc_steps: steps(&rcs)?,
        };
        if rows.len() != grid.len() {
            return Err(FuzzyError::LookupFormat(format!(
                "{} rows for a grid of {}",
                rows.len(),
                grid.len()
            )));
        }
        let mut reward = vec![f64::NAN; grid.len()];
        let mut punishment = vec![f64::NAN; grid.len()];
        for (d, s, r, rw, pu) in rows {
            let di = (d as u64 * grid.dpb_steps as u64 / 1_000_000) as u32;
            let ri = (r as u64 * grid.rc_steps as u64 / 1_000_000) as u32;
            let i = grid
                .index(di, s, ri)
                .ok_or_else(|| FuzzyError::LookupFormat("key outside grid".into()))?;
            if !reward[i].is_nan() {
                return Err(FuzzyError::LookupFormat("duplicate key".into()));
            }
            reward[i] = rw;
            punishment[i] = pu;
        }
        Ok(Self {
            grid,
            reward,
            punishment,
        })
    }
}

impl Assessor for LookupTable {
    /// Snaps to the nearest grid point; severities missing from the grid
    /// are an input error.
    fn assess(&self, dpb: f64, si: u8, rc: f64, kind: AssessmentKind) -> Result<f64, FuzzyError> {
        self.nearest(dpb, si, rc, kind)
            .ok_or(FuzzyError::CrispOutOfDomain {
                variable: "SI".into(),
                value: si as f64,
                lo: 0.0,
                hi: 12.0,
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::FuzzyEngine;

    fn small() -> LookupGrid {
        LookupGrid {
            dpb_steps: 2,
            si_levels: vec![0, 6, 12],
            rc_steps: 4,
        }
    }

    #[test]
    fn default_grid_size() {
        assert_eq!(LookupGrid::default().len(), 11 * 13 * 101);
    }

    #[test]
    fn table_holds_both_modes() {
        let e = FuzzyEngine::default();
        let t = LookupTable::build(&e, small()).unwrap();
        assert_eq!(t.len(), 3 * 3 * 5);
    }

    #[test]
    fn exact_and_nearest_lookup() {
        let e = FuzzyEngine::default();
        let t = LookupTable::build(&e, small()).unwrap();
        let direct = e.assess(0.5, 6, 0.25, AssessmentKind::Reward).unwrap();
        assert_eq!(t.get(0.5, 6, 0.25, AssessmentKind::Reward), Some(direct));
        assert_eq!(t.get(0.51, 6, 0.25, AssessmentKind::Reward), None);
        assert_eq!(t.get(0.5, 5, 0.25, AssessmentKind::Reward), None);
        assert_eq!(t.nearest(0.52, 6, 0.27, AssessmentKind::Reward), Some(direct));
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let e = FuzzyEngine::default();
        let t = LookupTable::build(&e, small()).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf, Some("test")).unwrap();
        let back = LookupTable::read_from(buf.as_slice()).unwrap();
        assert_eq!(back.grid, t.grid);
        for (a, b) in t.reward.iter().zip(&back.reward) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn decimal_only_files_still_load() {
        let text = "dpb,si,rc,reward,punishment\n0.000000,3,0.000000,0.010000,0.020000\n0.000000,3,1.000000,0.030000,0.040000\n1.000000,3,0.000000,0.050000,0.060000\n1.000000,3,1.000000,0.070000,0.080000\n";
        let t = LookupTable::read_from(text.as_bytes()).unwrap();
        assert_eq!(t.get(1.0, 3, 0.0, AssessmentKind::Punishment), Some(0.06));
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(LookupTable::read_from("".as_bytes()).is_err());
        assert!(LookupTable::read_from("x,y\n".as_bytes()).is_err());
        let short = "dpb,si,rc,reward,punishment\n0.000000,3,0.000000,0.01,0.02\n";
        assert!(LookupTable::read_from(short.as_bytes()).is_err());
    }
}
