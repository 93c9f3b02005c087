use std::sync::OnceLock;

use daa_waitmap::agent::AgentMode;
use daa_waitmap::encounters::{sample_batch, EncounterSpec};
use daa_waitmap::geometry::Separation;
use daa_waitmap::mdp::{IntruderMotionModel, MdpConfig, StateGrid, WaitMap};
use daa_waitmap::sim::{run_batch, run_encounter, BatchReport, Group, SimConfig, TRACE_HEADER};
use daa_waitmap::Error;

fn map() -> &'static WaitMap {
    static MAP: OnceLock<WaitMap> = OnceLock::new();
    MAP.get_or_init(|| {
        WaitMap::build(StateGrid::default(), IntruderMotionModel::default(), MdpConfig::default()).unwrap()
    })
}

fn spec(ia_deg: f64, hmd: f64, vmd: f64) -> EncounterSpec {
    EncounterSpec {
        seed: 11,
        intruder_speed: 50.0,
        intruder_vz: 0.0,
        ia_deg,
        hma_deg: 0.0,
        hmd_target: hmd,
        vmd_target: vmd,
        turn_rate_dps: 0.0,
        advance_rate: 0.5,
    }
}

#[test]
fn far_apart_encounter_stays_on_route() {
    for group in Group::ALL {
        let log = run_encounter(&spec(90.0, 6000.0, 600.0), &SimConfig::for_group(group), Some(map())).unwrap();
        assert_eq!(log.records.len(), 241);
        assert_eq!(log.summary.conflict_steps, 0);
        assert_eq!(log.summary.lowc_steps, 0);
        assert_eq!(log.summary.pilot_decisions, 0);
        for r in &log.records {
            assert!(r.mode.is_none());
            assert!(r.own.y.abs() < 1e-9 && r.own.heading.abs() < 1e-12);
        }
        assert!(log.summary.max_deviation_h_m < 1e-9);
    }
}

#[test]
fn head_on_under_id2_never_overrides_a_pilot_command() {
    let log = run_encounter(&spec(180.0, 0.0, 0.0), &SimConfig::for_group(Group::ID2), Some(map())).unwrap();
    assert!(log.summary.conflict_steps > 0);
    assert!(log.summary.wait_steps > 0);
    assert_eq!(log.summary.exec_daa_override, 0);
    assert!(log.records.iter().all(|r| !r.is_override()));
    assert!(log.summary.exec_pilot + log.summary.exec_blended > 0);
    let first_wait = log.records.iter().position(|r| r.mode == Some(AgentMode::Wait)).unwrap();
    let first_pilot = log.records.iter().position(|r| r.pilot_in_hand).unwrap();
    assert!(first_wait < first_pilot);
}

#[test]
fn flags_agree_with_recorded_states() {
    let cfg = SimConfig::for_group(Group::B2);
    let th = cfg.params.thresholds;
    for s in sample_batch(40, 3) {
        let log = run_encounter(&s, &cfg, Some(map())).unwrap();
        for r in &log.records {
            let sep = Separation::between(&r.own, &r.intr, &th);
            assert_eq!(r.lowc, sep.is_lowc(&th));
            assert_eq!(r.nmac, sep.is_nmac(&th));
            assert!(!r.nmac || r.lowc);
        }
        let lowc = log.records.iter().filter(|r| r.lowc).count();
        assert_eq!(lowc, log.summary.lowc_steps);
    }
}

#[test]
fn runs_are_reproducible_across_thread_counts() {
    let specs = sample_batch(30, 9);
    let cfg = SimConfig::for_group(Group::ID2);
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let one = pool(1).install(|| run_batch(&specs, &cfg, Some(map()))).unwrap();
    let four = pool(4).install(|| run_batch(&specs, &cfg, Some(map()))).unwrap();
    assert_eq!(one.logs, four.logs);
    let again = run_encounter(&specs[0], &cfg, Some(map())).unwrap();
    assert_eq!(again, one.logs[0]);
}

#[test]
fn map_groups_need_a_map() {
    let err = run_encounter(&spec(180.0, 0.0, 0.0), &SimConfig::for_group(Group::ID1), None).unwrap_err();
    assert!(matches!(err, Error::MissingMap(_)));
    assert!(run_encounter(&spec(180.0, 0.0, 0.0), &SimConfig::for_group(Group::IC1), None).is_ok());
}

#[test]
fn trace_rows_match_the_header() {
    let log = run_encounter(&spec(180.0, 0.0, 0.0), &SimConfig::for_group(Group::ID1), Some(map())).unwrap();
    let mut buf = Vec::new();
    log.write_trace(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), TRACE_HEADER.join(","));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 241);
    assert!(rows.iter().all(|l| l.split(',').count() == TRACE_HEADER.len()));
}

#[test]
fn report_round_trips_and_is_consistent() {
    let specs = sample_batch(40, 5);
    let runs: Vec<_> = Group::ALL
        .iter()
        .map(|g| run_batch(&specs, &SimConfig::for_group(*g), Some(map())).unwrap())
        .collect();
    let report = BatchReport::new(&specs, &runs).unwrap();
    report.check_consistency().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    report.save_json(&path).unwrap();
    assert_eq!(BatchReport::load_json(&path).unwrap(), report);

    let other_specs = sample_batch(40, 6);
    let other_runs = [run_batch(&other_specs, &SimConfig::for_group(Group::B1), Some(map())).unwrap()];
    let other = BatchReport::new(&other_specs, &other_runs).unwrap();
    assert!(matches!(BatchReport::merge([report, other]), Err(Error::UnpairedBatch(..))));
}
