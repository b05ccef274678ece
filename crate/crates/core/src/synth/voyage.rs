use chrono::{Duration, Timelike};
use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{FuelLaw, Manifest, Noise, SmoothField, SynthCorpus, SynthError, SynthOptions, Waypoint};
use crate::grid::{EnvGrid, GridAxis, TimeAxis};
use crate::models::derive_seed;
use crate::report::{format_ddm, parse_ddm_position, Cell, Compass, GeoPosition, VoyageRecord};

const OCEAN_DEPTHS: [f64; 2] = [0.494025, 47.37369];
const MS_TO_KN: f64 = 1.943_844;
const BEAUFORT_UPPER: [f64; 12] = [0.5, 1.6, 3.4, 5.5, 8.0, 10.8, 13.9, 17.2, 20.8, 24.5, 28.5, 32.7];

fn to_vec(p: &GeoPosition) -> [f64; 3] {
    let (la, lo) = (p.lat.to_radians(), p.lon.to_radians());
    [la.cos() * lo.cos(), la.cos() * lo.sin(), la.sin()]
}

fn from_vec(v: [f64; 3]) -> GeoPosition {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let lat = (v[2] / n).clamp(-1.0, 1.0).asin().to_degrees();
    let lon = v[1].atan2(v[0]).to_degrees();
    GeoPosition::new(lat, lon).expect("unit vector maps to a valid position")
}

fn angle(a: &GeoPosition, b: &GeoPosition) -> f64 {
    let (u, v) = (to_vec(a), to_vec(b));
    let dot = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).clamp(-1.0, 1.0);
    dot.acos()
}

/// Point a fraction `f` of the way from `a` to `b` along the great circle.
pub fn great_circle_point(a: &GeoPosition, b: &GeoPosition, f: f64) -> GeoPosition {
    let om = angle(a, b);
    if om < 1e-12 {
        return *a;
    }
    let (u, v) = (to_vec(a), to_vec(b));
    let (sa, sb) = (((1.0 - f) * om).sin() / om.sin(), (f * om).sin() / om.sin());
    from_vec([sa * u[0] + sb * v[0], sa * u[1] + sb * v[1], sa * u[2] + sb * v[2]])
}

fn initial_bearing(a: &GeoPosition, b: &GeoPosition) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dl = (b.lon - a.lon).to_radians();
    let y = dl.sin() * p2.cos();
    let x = p1.cos() * p2.sin() - p1.sin() * p2.cos() * dl.cos();
    y.atan2(x).to_degrees().rem_euclid(360.0)
}

fn compass_of(bearing: f64) -> Compass {
    let i = ((bearing.rem_euclid(360.0) / 22.5).round() as usize) % 16;
    Compass::all().nth(i).expect("16 winds")
}

fn beaufort(speed_ms: f64) -> u8 {
    BEAUFORT_UPPER.iter().position(|&u| speed_ms < u).unwrap_or(12) as u8
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (v * s).round() / s
}

struct DayPlan {
    position: GeoPosition,
    leg: usize,
    heading: f64,
}

fn plan_route(route: &[Waypoint], n_days: usize) -> Vec<DayPlan> {
    if route.len() == 1 {
        return (0..n_days).map(|_| DayPlan { position: route[0].position, leg: 0, heading: 0.0 }).collect();
    }
    let legs: Vec<f64> = route.windows(2).map(|w| angle(&w[0].position, &w[1].position)).collect();
    let total: f64 = legs.iter().sum();
    (0..n_days)
        .map(|i| {
            let frac = if n_days == 1 { 0.0 } else { i as f64 / (n_days - 1) as f64 };
            let mut d = frac * total;
            let mut leg = 0;
            while leg + 1 < legs.len() && d > legs[leg] {
                d -= legs[leg];
                leg += 1;
            }
            let f = if legs[leg] > 0.0 { (d / legs[leg]).clamp(0.0, 1.0) } else { 0.0 };
            let (a, b) = (&route[leg].position, &route[leg + 1].position);
            let p = great_circle_point(a, b, f);
            // snap to the one-decimal-minute resolution of the report format
            let position = parse_ddm_position(&format_ddm(&p)).expect("formatted position parses");
            let heading = if f < 1.0 { initial_bearing(&p, b) } else { initial_bearing(a, b) };
            DayPlan { position, leg, heading }
        })
        .collect()
}

fn axis_around(lo: f64, hi: f64, step: f64) -> Result<GridAxis, SynthError> {
    let start = (lo / step).floor() * step;
    let count = ((hi - start) / step).ceil() as usize + 1;
    Ok(GridAxis::new(start, step, count)?)
}

fn raster(
    fields: &IndexMap<String, SmoothField>,
    lat: &GridAxis,
    lon: &GridAxis,
    time: &TimeAxis,
    depth_scale: &[f64],
    t0: chrono::DateTime<chrono::Utc>,
) -> IndexMap<String, Vec<f32>> {
    fields
        .iter()
        .map(|(code, f)| {
            let mut v = Vec::with_capacity(time.count * depth_scale.len() * lat.count * lon.count);
            for t in 0..time.count {
                let td = (time.at(t) - t0).num_seconds() as f64 / 86_400.0;
                for &s in depth_scale {
                    for i in 0..lat.count {
                        for j in 0..lon.count {
                            let x = f.eval(lat.coord(i), lon.coord(j), td);
                            v.push((f.mean + s * (x - f.mean)) as f32);
                        }
                    }
                }
            }
            (code.clone(), v)
        })
        .collect()
}

/// Sails `route` over `n_days` noon reports and builds the grids around it.
pub fn generate_voyage(
    law: &FuelLaw,
    n_days: usize,
    route: &[Waypoint],
    opts: &SynthOptions,
) -> Result<SynthCorpus, SynthError> {
    law.validate()?;
    if n_days == 0 {
        return Err(SynthError::InvalidParameter("n_days must be >= 1".into()));
    }
    if route.is_empty() {
        return Err(SynthError::InvalidParameter("route needs at least one waypoint".into()));
    }
    if opts.start.num_seconds_from_midnight() != 0 || opts.start.nanosecond() != 0 {
        return Err(SynthError::InvalidParameter("start must be a UTC midnight".into()));
    }
    if opts.atmos_step_hours <= 0 || 24 % opts.atmos_step_hours != 0 {
        return Err(SynthError::InvalidParameter("atmos_step_hours must divide 24".into()));
    }
    let plan = plan_route(route, n_days);

    let lat_min = plan.iter().map(|d| d.position.lat).fold(f64::INFINITY, f64::min);
    let lat_max = plan.iter().map(|d| d.position.lat).fold(f64::NEG_INFINITY, f64::max);
    let lon_min = plan.iter().map(|d| d.position.lon).fold(f64::INFINITY, f64::min);
    let lon_max = plan.iter().map(|d| d.position.lon).fold(f64::NEG_INFINITY, f64::max);
    if lon_max - lon_min > 180.0 {
        return Err(SynthError::RouteOutOfBounds("route crosses the antimeridian".into()));
    }
    let (b_lat0, b_lat1, b_lon0, b_lon1) = match opts.bounds {
        Some((a, b, c, d)) => {
            if lat_min < a || lat_max > b || lon_min < c || lon_max > d {
                return Err(SynthError::RouteOutOfBounds(format!(
                    "route spans lat [{lat_min}, {lat_max}], lon [{lon_min}, {lon_max}]"
                )));
            }
            (a, b, c, d)
        }
        None => (
            (lat_min - opts.pad_deg).max(-89.0),
            (lat_max + opts.pad_deg).min(89.0),
            lon_min - opts.pad_deg,
            lon_max + opts.pad_deg,
        ),
    };

    let mut field_rng = ChaCha8Rng::seed_from_u64(derive_seed(law.seed, 1));
    let mut field = |m: f64, a: f64, floor: Option<f64>| SmoothField::random(&mut field_rng, m, a, floor);
    let ocean_fields: IndexMap<String, SmoothField> = [
        ("uo", field(0.0, 0.4, None)),
        ("vo", field(0.0, 0.4, None)),
        ("thetao", field(27.0, 2.0, None)),
        ("so", field(34.0, 0.6, None)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let atmos_fields: IndexMap<String, SmoothField> = [
        ("u10", field(0.0, 6.0, None)),
        ("v10", field(0.0, 6.0, None)),
        ("swh", field(1.8, 0.9, Some(0.1))),
        ("msl", field(101_200.0, 500.0, None)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();

    let t0 = opts.start;
    let ocean = EnvGrid::new(
        axis_around(b_lat0, b_lat1, opts.ocean_step_deg)?,
        axis_around(b_lon0, b_lon1, opts.ocean_step_deg)?,
        TimeAxis::daily(t0 + Duration::hours(12), n_days)?,
        Some(OCEAN_DEPTHS.to_vec()),
        -32767.0,
        IndexMap::new(),
        IndexMap::new(),
    )?;
    let ocean_params = raster(&ocean_fields, &ocean.lat, &ocean.lon, &ocean.time, &[1.0, 0.6], t0);
    let ocean = EnvGrid::new(ocean.lat, ocean.lon, ocean.time, ocean.depth_levels, ocean.fill_value, ocean_params, IndexMap::new())?;

    let per_day = (24 / opts.atmos_step_hours) as usize;
    let atmos_time = TimeAxis::new(t0, opts.atmos_step_hours * 3600, n_days * per_day)?;
    let a_lat = axis_around(b_lat0, b_lat1, opts.atmos_step_deg)?;
    let a_lon = axis_around(b_lon0, b_lon1, opts.atmos_step_deg)?;
    let atmos_params = raster(&atmos_fields, &a_lat, &a_lon, &atmos_time, &[1.0], t0);
    let atmos = EnvGrid::new(a_lat, a_lon, atmos_time, None, -32767.0, atmos_params, IndexMap::new())?;
    let atmos_daily = atmos.daily_mean()?;

    // operating point per leg, then per day
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(law.seed, 2));
    let n_legs = route.len().saturating_sub(1).max(1);
    let leg_rpm: Vec<f64> = (0..n_legs).map(|_| rng.random_range(67.0..75.0)).collect();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let z = |rng: &mut ChaCha8Rng| std_normal.sample(rng);

    struct Day {
        ts: chrono::DateTime<chrono::Utc>,
        env: IndexMap<String, f64>,
        rpm: f64,
        slip_pct: f64,
        sog: f64,
        fwd: f64,
        aft: f64,
        wind: (Option<Compass>, u8),
        swell: (Compass, u8),
        current: (Compass, f64),
        signal: f64,
    }
    let mut days = Vec::with_capacity(n_days);
    for (i, d) in plan.iter().enumerate() {
        let ts = t0 + Duration::days(i as i64) + Duration::hours(12);
        let mut env = IndexMap::new();
        for g in [&ocean, &atmos_daily] {
            let s = g.sample_at(&d.position, ts).map_err(|e| SynthError::RouteOutOfBounds(e.to_string()))?;
            for (k, v) in s.values {
                env.insert(k, v.expect("synthetic grids have no gaps"));
            }
        }
        let rpm = round_to((leg_rpm[d.leg] + rng.random_range(-6.0..6.0)).clamp(50.0, 95.0), 1);
        let slip_pct = round_to((3.0 + 1.5 * env["swh"] + 0.5 * z(&mut rng)).max(0.0), 1);
        let h = d.heading.to_radians();
        let along_kn = (env["uo"] * h.sin() + env["vo"] * h.cos()) * MS_TO_KN;
        let sog = round_to((0.17 * rpm * (1.0 - slip_pct / 100.0) + along_kn + 0.15 * z(&mut rng)).max(0.0), 1);
        let loaded = d.leg % 2 == 0;
        let fwd = round_to(if loaded { 10.8 } else { 6.2 } + 0.05 * z(&mut rng), 2);
        let aft = round_to(fwd + if loaded { 0.3 } else { 1.6 } + 0.1 * z(&mut rng), 2);
        let (u, v) = (env["u10"], env["v10"]);
        let wspeed = u.hypot(v);
        let wind_dir = (wspeed >= 0.5).then(|| compass_of((-u).atan2(-v).to_degrees()));
        let wind = (wind_dir, beaufort(wspeed));
        let swell_bearing = wind_dir.and_then(Compass::bearing_deg).unwrap_or(0.0) + 45.0;
        let swell = (compass_of(swell_bearing), (env["swh"] * 1.3).round().clamp(0.0, 12.0) as u8);
        let (cu, cv) = (env["uo"], env["vo"]);
        let current = (compass_of(cu.atan2(cv).to_degrees()), round_to(cu.hypot(cv) * MS_TO_KN, 1));
        let signal = law.signal(rpm, &env, aft - fwd);
        days.push(Day { ts, env, rpm, slip_pct, sog, fwd, aft, wind, swell, current, signal });
    }

    let sigma = match law.noise {
        Noise::Absolute { sigma } => sigma,
        Noise::Relative { fraction } => {
            let s: Vec<f64> = days.iter().map(|d| d.signal).collect();
            fraction * crate::scalar::variance(&s).unwrap_or(0.0).sqrt()
        }
    };
    let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(law.seed, 3));
    let mut records = Vec::with_capacity(n_days);
    let mut true_fc = Vec::with_capacity(n_days);
    for (i, (d, p)) in days.iter().zip(&plan).enumerate() {
        let fc = d.signal + sigma * z(&mut noise_rng);
        let loaded = p.leg % 2 == 0;
        let aux = round_to((1.4 + 0.1 * z(&mut noise_rng)).max(0.5), 2);
        let ulsfo_boiler = if loaded { 0.1 } else { 0.3 };
        let me = (fc - aux - ulsfo_boiler).max(0.0);
        let ulsfo_me = round_to(me * 0.96, 2);
        let mgo_me = round_to(me - ulsfo_me, 2);

        let mut r = VoyageRecord::empty(i, d.ts, p.position);
        r.sog_avg_24h = Cell::Present(d.sog);
        r.engine_rpm_avg_24h = Cell::Present(d.rpm);
        r.propeller_slip = Cell::Present(d.slip_pct / 100.0);
        r.wind_dir = Cell::Present(d.wind.0.unwrap_or(Compass::Calm));
        r.wind_force = Cell::Present(d.wind.1);
        r.swell_dir = Cell::Present(d.swell.0);
        r.swell_force = Cell::Present(d.swell.1);
        r.current_dir = Cell::Present(d.current.0);
        r.current_speed = Cell::Present(d.current.1);
        r.fuel_ulsfo_me = Cell::Present(ulsfo_me);
        r.fuel_ulsfo_boiler = Cell::Present(ulsfo_boiler);
        r.fuel_mgo_me = Cell::Present(mgo_me);
        r.fuel_mgo_boiler = Cell::Present(0.0);
        r.fuel_mgo_aux = Cell::Present(aux);
        r.draft_fwd = Cell::Present(d.fwd);
        r.draft_aft = Cell::Present(d.aft);
        let next = route.get(p.leg + 1).unwrap_or(&route[0]);
        r.next_port = Cell::Present(next.name.clone());
        records.push(r);
        true_fc.push(d.signal);
        debug_assert!(d.env.len() == 8);
    }

    let manifest = Manifest {
        law: law.clone(),
        sigma,
        n_days,
        route: route.to_vec(),
        options: opts.clone(),
        ocean_fields,
        atmos_fields,
        defects: None,
    };
    Ok(SynthCorpus { records, ocean, atmos, true_fc, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::default_route;

    #[test]
    fn great_circle_endpoints_and_midpoint() {
        let a = GeoPosition::new(0.0, 0.0).unwrap();
        let b = GeoPosition::new(0.0, 90.0).unwrap();
        let m = great_circle_point(&a, &b, 0.5);
        assert!(m.lat.abs() < 1e-9 && (m.lon - 45.0).abs() < 1e-9);
        let e = great_circle_point(&a, &b, 1.0);
        assert!((e.lon - 90.0).abs() < 1e-9);
        assert!((initial_bearing(&a, &b) - 90.0).abs() < 1e-9);
    }

    #[test]
    fn beaufort_scale() {
        assert_eq!(beaufort(0.2), 0);
        assert_eq!(beaufort(5.0), 3);
        assert_eq!(beaufort(40.0), 12);
    }

    #[test]
    fn deterministic_and_shaped() {
        let law = FuelLaw::material(5);
        let a = generate_voyage(&law, 30, &default_route(), &SynthOptions::default()).unwrap();
        let b = generate_voyage(&law, 30, &default_route(), &SynthOptions::default()).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.ocean, b.ocean);
        assert_eq!(a.records.len(), 30);
        assert_eq!(a.atmos.time.count, 120);
        assert_eq!(a.ocean.depth_levels.as_deref(), Some(&OCEAN_DEPTHS[..]));
        assert_eq!(a.records[0].next_port.get().as_deref(), Some("Singapore"));
        assert_eq!(a.records[29].next_port.get().as_deref(), Some("Port Klang"));
        for r in &a.records {
            let total: f64 = [&r.fuel_ulsfo_me, &r.fuel_ulsfo_boiler, &r.fuel_mgo_me, &r.fuel_mgo_boiler, &r.fuel_mgo_aux]
                .iter()
                .map(|c| c.get().unwrap())
                .sum();
            assert!(total > 15.0 && total < 80.0, "total {total}");
        }
        let c = generate_voyage(&FuelLaw::material(6), 30, &default_route(), &SynthOptions::default()).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn bounds_enforced() {
        let opts = SynthOptions { bounds: Some((0.0, 5.0, 100.0, 105.0)), ..Default::default() };
        assert!(matches!(
            generate_voyage(&FuelLaw::material(1), 10, &default_route(), &opts),
            Err(SynthError::RouteOutOfBounds(_))
        ));
        let bad_law = FuelLaw { rpm_cubed: 0.0, ..FuelLaw::material(1) };
        assert!(generate_voyage(&bad_law, 10, &default_route(), &SynthOptions::default()).is_err());
        assert!(generate_voyage(&FuelLaw::material(1), 0, &default_route(), &SynthOptions::default()).is_err());
    }
}
