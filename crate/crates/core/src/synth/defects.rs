use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::report::{Cell, StateFlag, VoyageRecord};

/// Fraction of rows receiving each defect type. Defect rows are disjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectSpec {
    pub seed: u64,
    pub state_flag_rate: f64,
    pub startup_rate: f64,
    pub outlier_rate: f64,
    pub missing_rate: f64,
}

/// Which rows (by `VoyageRecord::row`) were altered and how.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DefectLog {
    pub state_flag_rows: Vec<usize>,
    pub startup_rows: Vec<usize>,
    pub outlier_rows: Vec<usize>,
    /// `(row, field)` of each blanked cell.
    pub missing_cells: Vec<(usize, String)>,
}

impl DefectLog {
    pub fn total_rows(&self) -> usize {
        self.state_flag_rows.len() + self.startup_rows.len() + self.outlier_rows.len() + self.missing_cells.len()
    }
}

const BLANKABLE: [&str; 4] = ["propeller_slip", "wind_force", "draft_aft", "swell_force"];

fn set_total(r: &mut VoyageRecord, total: f64) {
    let aux = r.fuel_mgo_aux.get().unwrap_or(0.0).min(total);
    let me = ((total - aux) * 100.0).round() / 100.0;
    r.fuel_ulsfo_me = Cell::Present(me);
    r.fuel_ulsfo_boiler = Cell::Present(0.0);
    r.fuel_mgo_me = Cell::Present(0.0);
    r.fuel_mgo_boiler = Cell::Present(0.0);
    r.fuel_mgo_aux = Cell::Present(aux);
}

fn total_of(r: &VoyageRecord) -> f64 {
    [&r.fuel_ulsfo_me, &r.fuel_ulsfo_boiler, &r.fuel_mgo_me, &r.fuel_mgo_boiler, &r.fuel_mgo_aux]
        .iter()
        .filter_map(|c| c.get())
        .sum()
}

/// Plants state-shift, startup, outlier and incomplete rows.
///
/// Each defect count is `round(rate * n)`; rows are drawn without
/// replacement from one seeded permutation so no row carries two defects.
pub fn inject_defects(
    mut records: Vec<VoyageRecord>,
    spec: &DefectSpec,
) -> Result<(Vec<VoyageRecord>, DefectLog), SynthError> {
    let rates = [spec.state_flag_rate, spec.startup_rate, spec.outlier_rate, spec.missing_rate];
    if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(SynthError::InvalidParameter("defect rates must lie in [0, 1]".into()));
    }
    let n = records.len();
    let counts: Vec<usize> = rates.iter().map(|r| (r * n as f64).round() as usize).collect();
    if counts.iter().sum::<usize>() > n {
        return Err(SynthError::InvalidParameter("defect rates sum to more than the row count".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut picks = order.into_iter();
    let mut take = |k: usize| {
        let mut v: Vec<usize> = picks.by_ref().take(k).collect();
        v.sort_unstable();
        v
    };
    let (state, startup, outlier, missing) = (take(counts[0]), take(counts[1]), take(counts[2]), take(counts[3]));

    let mut log = DefectLog::default();
    for &i in &state {
        let r = &mut records[i];
        let flag = StateFlag::ALL[rng.random_range(0..StateFlag::ALL.len())];
        r.state_flags.insert(flag);
        r.engine_rpm_avg_24h = Cell::Present((rng.random_range(10.0..35.0f64) * 10.0).round() / 10.0);
        r.sog_avg_24h = Cell::Present((rng.random_range(0.0..4.0f64) * 10.0).round() / 10.0);
        set_total(r, (rng.random_range(2.0..6.0f64) * 100.0).round() / 100.0);
        log.state_flag_rows.push(r.row);
    }
    for &i in &startup {
        let r = &mut records[i];
        r.sog_avg_24h = Cell::Present((rng.random_range(10.0..14.0f64) * 10.0).round() / 10.0);
        set_total(r, (rng.random_range(6.0..12.0f64) * 100.0).round() / 100.0);
        log.startup_rows.push(r.row);
    }
    for &i in &outlier {
        let r = &mut records[i];
        let t = total_of(r);
        set_total(r, t * 3.0 + 40.0);
        log.outlier_rows.push(r.row);
    }
    for &i in &missing {
        let r = &mut records[i];
        let field = BLANKABLE[rng.random_range(0..BLANKABLE.len())];
        match field {
            "propeller_slip" => r.propeller_slip = Cell::Missing,
            "wind_force" => r.wind_force = Cell::Missing,
            "draft_aft" => r.draft_aft = Cell::Missing,
            _ => r.swell_force = Cell::Missing,
        }
        log.missing_cells.push((r.row, field.to_string()));
    }
    Ok((records, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{default_route, generate_voyage, reference_defects, FuelLaw, SynthOptions};
    use std::collections::BTreeSet;

    fn clean(n: usize) -> Vec<VoyageRecord> {
        generate_voyage(&FuelLaw::material(2), n, &default_route(), &SynthOptions::default()).unwrap().records
    }

    #[test]
    fn zero_rates_are_identity() {
        let recs = clean(40);
        let spec = DefectSpec { seed: 1, state_flag_rate: 0.0, startup_rate: 0.0, outlier_rate: 0.0, missing_rate: 0.0 };
        let (out, log) = inject_defects(recs.clone(), &spec).unwrap();
        assert_eq!(out, recs);
        assert_eq!(log.total_rows(), 0);
    }

    #[test]
    fn counts_disjoint_and_applied() {
        let recs = clean(296);
        let (out, log) = inject_defects(recs.clone(), &reference_defects(9)).unwrap();
        assert_eq!(log.state_flag_rows.len(), 30);
        assert_eq!(log.startup_rows.len(), 4);
        assert_eq!(log.outlier_rows.len(), 4);
        assert_eq!(log.missing_cells.len(), 3);
        let mut all: BTreeSet<usize> = BTreeSet::new();
        for r in log.state_flag_rows.iter().chain(&log.startup_rows).chain(&log.outlier_rows) {
            assert!(all.insert(*r));
        }
        for (r, _) in &log.missing_cells {
            assert!(all.insert(*r));
        }
        for &r in &log.state_flag_rows {
            assert!(!out[r].state_flags.is_empty());
        }
        for &r in &log.outlier_rows {
            assert!((total_of(&out[r]) - (3.0 * total_of(&recs[r]) + 40.0)).abs() < 0.02);
        }
        let changed = out.iter().zip(&recs).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 41);
    }

    #[test]
    fn rejects_bad_rates() {
        let spec = DefectSpec { seed: 1, state_flag_rate: 0.7, startup_rate: 0.5, outlier_rate: 0.0, missing_rate: 0.0 };
        assert!(inject_defects(clean(10), &spec).is_err());
    }
}
