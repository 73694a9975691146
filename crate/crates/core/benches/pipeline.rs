use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rhem::sampling::{build_strata, RiskSetPolicy, Split, StrataConfig};
use rhem::simulate::{make_coauthor_like, make_meeting_like, CoauthorConfig};
use rhem::{fit_cox, CoxOptions, Event, StatisticSpec};

struct Workload {
    name: &'static str,
    events: Vec<Event>,
    specs: Vec<StatisticSpec>,
    policy: RiskSetPolicy,
    split: Split,
}

fn workloads() -> Vec<Workload> {
    let meeting = StatisticSpec::parse_list(&["subrep(1)", "subrep(2)", "repetition", "size", "size2"]).unwrap();
    let coauthor =
        StatisticSpec::parse_list(&["subrep(1)", "subrep(2)", "subrep(3)", "success", "subsuccess(1)"]).unwrap();
    let cfg = CoauthorConfig { events: 20_000, nodes: 20_000, periods: 20, ..Default::default() };
    vec![
        Workload {
            name: "meeting/unconstrained",
            events: make_meeting_like(1),
            specs: meeting,
            policy: RiskSetPolicy::unconstrained(20),
            split: Split::All,
        },
        Workload {
            name: "coauthor/repeated",
            events: make_coauthor_like(&cfg),
            specs: coauthor,
            policy: RiskSetPolicy::repeated(1),
            split: Split::Repeated,
        },
    ]
}

fn run(w: &Workload) -> f64 {
    let config = StrataConfig::new(w.policy, &w.specs).split(w.split).seed(1);
    let set = build_strata(&w.events, false, &config, 0).unwrap();
    let labels: Vec<String> = w.specs.iter().map(|s| s.label.clone()).collect();
    fit_cox(&set.strata, &labels, &CoxOptions::default()).map(|f| f.log_likelihood).unwrap_or(f64::NAN)
}

#[cfg(feature = "parallel")]
fn modes() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("parallel-1-thread", one), ("parallel-all-threads", all)]
}

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("strata+fit");
    group.sample_size(10);
    for w in workloads() {
        #[cfg(feature = "parallel")]
        for (mode, pool) in modes() {
            group.bench_with_input(BenchmarkId::new(mode, w.name), &w, |b, w| b.iter(|| pool.install(|| run(w))));
        }
        #[cfg(not(feature = "parallel"))]
        group.bench_with_input(BenchmarkId::new("sequential", w.name), &w, |b, w| b.iter(|| run(w)));
    }
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
