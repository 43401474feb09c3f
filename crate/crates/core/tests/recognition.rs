use goalrec::domains::{generate, Family, GeneratorConfig, Setting};
use goalrec::harness::{build_dataset, truncate, Dataset};
use goalrec::landmarks::LandmarkExtractor;
use goalrec::planner::{validate, Plan};
use goalrec::recognizer::{recognize_trace, DomainModel, DEFAULT_THETA};
use goalrec::strips::ObservationTrace;

/// Replays dataset trace `i` against its own grounded instance.
fn local_trace(ds: &Dataset, i: usize, ratio: f64) -> (goalrec::strips::GroundTask, ObservationTrace) {
    let (task, map) = ds.ground_instance(ds.instance_of[i]).unwrap();
    let prefix = truncate(&ds.traces[i], ratio);
    let actions = prefix.actions.iter().map(|&a| map[a as usize].unwrap()).collect();
    (task, ObservationTrace::new(actions, prefix.label).unwrap())
}

#[test]
fn blocks_set2_seventy_percent_prefix_majority() {
    let ds = build_dataset(&GeneratorConfig::new(Family::Blockwords, Setting::Set2, 12, 0.75), 130).unwrap();
    let bench = &ds.split.heldout[..20];
    let correct = bench
        .iter()
        .filter(|&&i| {
            let (task, obs) = local_trace(&ds, i, 0.7);
            let graphs = LandmarkExtractor::new(&task).extract_all().unwrap();
            let r = recognize_trace(DomainModel::Strips(&task), &graphs, &obs, DEFAULT_THETA, None).unwrap();
            Some(r.predicted) == obs.label
        })
        .count();
    assert!(correct > 10, "{correct}/20");
}

#[test]
fn full_traces_validate_and_reach_their_label() {
    for (family, setting, scale) in [
        (Family::Grid, Setting::Set2, 0.3),
        (Family::Logistics, Setting::Set2, 0.3),
        (Family::Blockwords, Setting::Set1, 0.25),
    ] {
        let ds = build_dataset(&GeneratorConfig::new(family, setting, 5, scale), 130).unwrap();
        for i in 0..ds.traces.len() {
            let (task, obs) = local_trace(&ds, i, 1.0);
            let h = obs.label.unwrap();
            let plan = Plan {
                actions: obs.actions.clone(),
            };
            validate(&task, &plan, task.hypothesis(h)).unwrap();
            let graphs = LandmarkExtractor::new(&task).extract_all().unwrap();
            let r = recognize_trace(DomainModel::Strips(&task), &graphs, &obs, DEFAULT_THETA, None).unwrap();
            assert_eq!(r.scores[h], 1.0, "{family} trace {i}");
        }
    }
}

#[test]
fn grid_set1_landmarks_are_uninformative() {
    let inst = generate(&GeneratorConfig::new(Family::Grid, Setting::Set1, 3, 1.0)).unwrap();
    let graphs = LandmarkExtractor::new(&inst.task).extract_all().unwrap();
    let sets: Vec<Vec<u32>> = graphs.iter().map(|g| g.non_trivial().collect()).collect();
    // each goal's only non-trivial landmark is its own robot position
    for (g, set) in graphs.iter().zip(&sets) {
        assert!(set.len() <= 2, "{set:?}");
        for f in &inst.task.hypothesis(g.goal_index).facts {
            assert!(g.landmarks.contains(f));
        }
    }
}

#[test]
fn logistics_set1_action_count() {
    let a = generate(&GeneratorConfig::new(Family::Logistics, Setting::Set1, 0, 1.0)).unwrap();
    let b = generate(&GeneratorConfig::new(Family::Logistics, Setting::Set1, 9, 1.0)).unwrap();
    assert_eq!(a.task.num_actions(), b.task.num_actions());
    // 10 cities, 4 locations each: order 10^3 ground actions after pruning
    let n = a.task.num_actions();
    assert!((500..5000).contains(&n), "{n}");
}

#[test]
fn logistics_set1_paper_trace_count() {
    // full trace count on the three-city map
    let ds = build_dataset(&GeneratorConfig::new(Family::Logistics, Setting::Set1, 0, 0.3), 2000).unwrap();
    assert_eq!(ds.traces.len(), 2000);
    assert_eq!(ds.instances.len(), 1);
    assert_eq!(ds.split.heldout.len(), 100);
    assert_eq!(ds.split.train.len() + ds.split.validation.len(), 1900);
}
