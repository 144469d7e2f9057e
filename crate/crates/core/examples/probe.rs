use csa::checks::*;
use csa::explore::{build_full_ts, DEFAULT_NODE_CAP};

fn main() {
    for name in ["narrow_choice", "narrow_choice_relaxed"] {
        let sys = csa::corpus::load(name).unwrap();
        for k in [2u32, 3] {
            let ts = build_full_ts(&sys, k, DEFAULT_NODE_CAP).unwrap();
            let (er, pg) = check_safety(&sys, &ts);
            println!(
                "{} @{}: nodes={} er={} pg={} stable={} exh={}",
                name, k, ts.node_count(), er.holds, pg.holds,
                check_stable_bounded(&sys, &ts).holds,
                check_exhaustive(&sys, &ts).holds,
            );
        }
        // does the state space saturate? compare node counts at 2 vs 3
    }
}
