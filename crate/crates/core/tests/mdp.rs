mod common;

use common::{brute_force_values, enumerate_paths, mirror_cell, random_acyclic_chain, small_config, small_grid};

use daa_waitmap::geometry::{self, RelativeState};
use daa_waitmap::mdp::{
    load_map, load_map_expecting, map_to_string, save_map, reward_value, transition_distribution, wait_times, Action,
    IntruderMotionModel, MdpConfig, StateGrid, WaitKernel, WaitMap,
};
use daa_waitmap::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn value_iteration_matches_finite_horizon_dp() {
    let grid = small_grid();
    let model = IntruderMotionModel::default();
    let cfg = small_config();
    let map = WaitMap::build(grid, model.clone(), cfg).unwrap();
    let oracle = brute_force_values(&grid, &model, &cfg, 200);
    for cell in 0..grid.normal_cells() {
        assert!(
            (map.value[cell] - oracle[cell]).abs() <= 1e-6,
            "cell {cell}: {} vs {}",
            map.value[cell],
            oracle[cell]
        );
        assert!(map.value[cell] >= 0.0);
    }
}

#[test]
fn hitting_times_match_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let rows = random_acyclic_chain(&mut rng);
        let n = rows.len();
        let k = WaitKernel::from_rows(rows.clone(), vec![0.0; n]).unwrap();
        let h = wait_times(&k, 1.0, 60, 60.0);
        for cell in 0..n {
            let (reach, weighted) = enumerate_paths(&rows, n + 1, n, cell);
            assert!((h.reach_prob[cell] - reach).abs() <= 1e-9);
            let expected = if reach > 0.0 { weighted / reach } else { 60.0 };
            assert!((h.wait_s[cell] - expected).abs() <= 1e-6, "{} vs {expected}", h.wait_s[cell]);
        }
    }
}

#[test]
fn wait_rows_sum_to_one() {
    let grid = small_grid();
    let cfg = small_config();
    let k = WaitKernel::build(&grid, &IntruderMotionModel::default(), &cfg).unwrap();
    for cell in 0..k.normal_cells() {
        let total: f64 = k.row(cell).map(|e| e.1).sum();
        assert!((total - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn transition_examples() {
    let grid = small_grid();
    let cfg = small_config();
    let model = IntruderMotionModel::default();
    let evade = transition_distribution(&grid, 3, Action::Evade, &cfg, &model).unwrap();
    assert_eq!(evade, vec![(grid.out_cell(), 1.0)]);
    assert!(reward_value(1220.0, 122.0, Action::Wait, &cfg).abs() < 1e-12);
}

fn default_map() -> WaitMap {
    WaitMap::build(StateGrid::default(), IntruderMotionModel::default(), MdpConfig::default()).unwrap()
}

#[test]
fn lookup_examples() {
    let map = default_map();
    let grid = map.grid;
    let cell = grid.index([7, 3, 1, 2, 4, 0]);
    assert_eq!(map.lookup(&grid.center(cell)).unwrap(), (map.action[cell], map.wait_time[cell]));

    // ahead and outrunning the ownship
    let away = RelativeState::new(1700.0, 100.0, 0.0, 150.0, 0.0, 0.0);
    assert_eq!(map.lookup(&away).unwrap(), (Action::Wait, 60.0));

    let closing = RelativeState::new(1700.0, 100.0, 0.0, 150.0, 0.0, std::f64::consts::PI);
    let clamped = grid.index([
        11,
        grid.dy.nearest(100.0),
        grid.dh.nearest(0.0),
        grid.vi.nearest(150.0),
        grid.vh.nearest(0.0),
        grid.theta_i.nearest(std::f64::consts::PI),
    ]);
    assert_eq!(map.lookup(&closing).unwrap(), (map.action[clamped], map.wait_time[clamped]));

    assert!(matches!(
        map.lookup(&RelativeState::special(geometry::StateTag::LoWC)),
        Err(Error::NotNormalState(_))
    ));
}

#[test]
fn map_invariants() {
    let map = default_map();
    let n = map.grid.normal_cells();
    assert_eq!(n, 72_000);
    assert_eq!(map.action.len(), 72_002);
    assert_eq!(map.action[n], Action::Terminal);
    assert_eq!(map.action[n + 1], Action::Terminal);
    for cell in 0..n {
        assert!(map.value[cell] >= 0.0);
        assert!(map.wait_time[cell] >= 0.0);
        if map.action[cell] == Action::Wait {
            assert!(map.wait_time[cell] >= map.config.dt);
        }
    }
}

#[test]
fn save_load_round_trip_is_exact() {
    let map = WaitMap::build(small_grid(), IntruderMotionModel::default(), small_config()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.json");
    save_map(&map, &path).unwrap();
    let back = load_map(&path).unwrap();
    assert_eq!(back, map);
    for (a, b) in back.value.iter().zip(&map.value) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn load_errors_are_distinct() {
    let map = WaitMap::build(small_grid(), IntruderMotionModel::default(), small_config()).unwrap();
    let text = map_to_string(&map).unwrap();
    let dir = tempfile::tempdir().unwrap();

    let truncated = dir.path().join("truncated.json");
    std::fs::write(&truncated, &text[..text.len() / 2]).unwrap();
    assert!(matches!(load_map(&truncated), Err(Error::CorruptFile { .. })));

    let tampered = dir.path().join("tampered.json");
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["arrays"]["wait_time_s"][0] = serde_json::json!(59.5);
    std::fs::write(&tampered, doc.to_string()).unwrap();
    assert!(matches!(load_map(&tampered), Err(Error::CorruptFile { .. })));

    let future = dir.path().join("future.json");
    std::fs::write(&future, text.replacen("\"format_version\":1", "\"format_version\":2", 1)).unwrap();
    assert!(matches!(
        load_map(&future),
        Err(Error::VersionMismatch { expected: 1, found: 2 })
    ));

    let good = dir.path().join("good.json");
    std::fs::write(&good, &text).unwrap();
    assert!(matches!(
        load_map_expecting(&good, &StateGrid::default()),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(load_map_expecting(&good, &small_grid()).is_ok());

    assert!(matches!(load_map(dir.path().join("missing.json")), Err(Error::Io { .. })));
}

fn biased_map(bias: f64) -> WaitMap {
    let model = IntruderMotionModel::default().with_turn_bias(bias);
    WaitMap::build(StateGrid::default(), model, MdpConfig::default()).unwrap()
}

#[test]
fn opposite_turn_bias_maps_are_mirror_images() {
    let plus = biased_map(5.0);
    let minus = biased_map(-5.0);
    let grid = plus.grid;
    let mut worst: f64 = 0.0;
    for cell in 0..grid.normal_cells() {
        worst = worst.max((plus.wait_time[cell] - minus.wait_time[mirror_cell(&grid, cell)]).abs());
    }
    assert!(worst <= 1e-9, "max mirror mismatch {worst}");
    assert_ne!(plus.wait_time, minus.wait_time);
}

#[test]
fn unbiased_map_is_self_mirror_symmetric() {
    let map = default_map();
    let grid = map.grid;
    for cell in 0..grid.normal_cells() {
        let m = mirror_cell(&grid, cell);
        assert!((map.wait_time[cell] - map.wait_time[m]).abs() <= 1e-9);
    }
}

#[test]
fn head_on_waits_are_shorter_than_overtaking() {
    let map = default_map();
    let grid = map.grid;
    let (mut ahead, mut behind) = ((0.0, 0), (0.0, 0));
    for cell in 0..grid.normal_cells() {
        let dx = grid.center(cell).dx;
        let acc = if dx > 0.0 { &mut ahead } else { &mut behind };
        acc.0 += map.wait_time[cell];
        acc.1 += 1;
    }
    assert!(ahead.0 / (ahead.1 as f64) < behind.0 / (behind.1 as f64));
}

#[test]
fn default_histogram_shape() {
    let h = default_map().histogram(5.0);
    assert!(h.min_s >= 1.0 && h.max_s <= 60.0);
    assert!((3.0..=15.0).contains(&h.mode_lo_s), "mode at {}", h.mode_lo_s);
    assert_eq!(h.cells + h.in_lowc, 72_000);
}
