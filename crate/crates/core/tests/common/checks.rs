//! Checks that run library code and compare it against the references in
//! the parent module. Each returns a description of the first problem.

use std::collections::BTreeMap;

use metaflow::fabric::PortCapacities;
use metaflow::model::FlowId;
use metaflow::schedulers::{madd_rates, FlowDemand};
use metaflow::{run_with_log, Fabric, FlowKey, JobDag, JobId, PortId, RunOptions, SchedulerKind, SchedulerOptions, EPS};
use rand::Rng;

use super::{deadlines_feasible_with, worst_port_excess, RefFlow};

/// A flow group with port residuals. Small groups have at most 3 flows,
/// integer sizes up to 4 and residuals in quarter steps; large ones are
/// arbitrary and sometimes have a drained port.
pub fn random_group(rng: &mut impl Rng, small: bool) -> (Vec<FlowDemand>, PortCapacities) {
    let machines = if small { rng.gen_range(2..=4) } else { rng.gen_range(2..=8) };
    let n = if small { rng.gen_range(1..=3) } else { rng.gen_range(1..=20) };
    let mut residual = PortCapacities::zero(machines);
    for m in 0..machines {
        for port in [PortId::egress(m), PortId::ingress(m)] {
            let value = if small {
                f64::from(rng.gen_range(1..=4u32)) * 0.25
            } else if rng.gen_bool(0.05) {
                0.0
            } else {
                rng.gen_range(0.01..=1.0)
            };
            residual.set(port, value);
        }
    }
    let flows = (0..n)
        .map(|i| {
            let src = rng.gen_range(0..machines);
            let dst = (src + rng.gen_range(1..machines)) % machines;
            let remaining = if small {
                f64::from(rng.gen_range(1..=4u32))
            } else {
                rng.gen_range(0.01..100.0)
            };
            FlowDemand {
                key: FlowKey::new(JobId(0), FlowId(i)),
                src,
                dst,
                remaining,
            }
        })
        .collect();
    (flows, residual)
}

/// Smallest common finish time on the 1/12 grid that an LP finds feasible
/// under the residuals, or `None` if there is none up to `limit`.
pub fn grid_common_finish(flows: &[FlowDemand], residual: &PortCapacities, limit: f64) -> Option<f64> {
    let refs: Vec<RefFlow> = flows
        .iter()
        .map(|f| RefFlow {
            src: f.src,
            dst: f.dst,
            size: f.remaining,
        })
        .collect();
    let cap = |egress: bool, m: usize| if egress { residual.egress(m) } else { residual.ingress(m) };
    let feasible = |n: u32| {
        let t = f64::from(n) / 12.0;
        deadlines_feasible_with(&refs, &vec![t; refs.len()], cap)
    };
    let top = (limit * 12.0).ceil() as u32;
    if !feasible(top) {
        return None;
    }
    // feasibility is monotone in the deadline
    let (mut lo, mut hi) = (0u32, top);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(f64::from(hi) / 12.0)
}

/// Simultaneity and capacity for one group, plus minimality against the
/// grid oracle when `oracle` is set.
pub fn check_madd(flows: &[FlowDemand], residual: &PortCapacities, oracle: bool) -> Result<f64, String> {
    let out = madd_rates(flows, residual);
    let machines = residual.num_machines();
    if out.is_blocked() {
        if !out.allocation.is_empty() {
            return Err("blocked group still got rates".into());
        }
        if !flows.iter().any(|f| residual.path(f.src, f.dst) <= EPS) {
            return Err("blocked although every path has capacity".into());
        }
        if oracle && grid_common_finish(flows, residual, 48.0).is_some() {
            return Err("blocked but the oracle finds a finish time".into());
        }
        return Ok(f64::INFINITY);
    }
    let gamma = out.gamma;
    let finish: Vec<f64> = flows.iter().map(|f| f.remaining / out.allocation.rate(f.key)).collect();
    let lo = finish.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finish.iter().copied().fold(0.0, f64::max);
    if hi - lo > 1e-6 * gamma || (hi - gamma).abs() > 1e-6 * gamma {
        return Err(format!("finish times {lo}..{hi} vs gamma {gamma}"));
    }
    for m in 0..machines {
        let out_rate: f64 = flows.iter().filter(|f| f.src == m).map(|f| out.allocation.rate(f.key)).sum();
        let in_rate: f64 = flows.iter().filter(|f| f.dst == m).map(|f| out.allocation.rate(f.key)).sum();
        if out_rate > residual.egress(m) + EPS || in_rate > residual.ingress(m) + EPS {
            return Err(format!("machine {m}: rates {out_rate}/{in_rate} exceed residuals"));
        }
    }
    if oracle {
        let best = grid_common_finish(flows, residual, 48.0).ok_or("oracle finds no finish time")?;
        if (best - gamma).abs() > 1e-6 {
            return Err(format!("gamma {gamma} but the oracle finds {best}"));
        }
    }
    Ok(gamma)
}

/// Runs `jobs` and checks byte conservation, port capacities, no rate on
/// drained flows and non-decreasing event times.
pub fn check_simulation(
    machines: usize,
    jobs: &[JobDag],
    kind: SchedulerKind,
    work_conserving: bool,
) -> Result<metaflow::SimReport, String> {
    let fabric = Fabric::unit(machines).expect("fabric");
    let sched = kind.build(SchedulerOptions { work_conserving });
    let options = RunOptions { record_intervals: true };
    let (report, log) = run_with_log(jobs, fabric, sched.as_ref(), &options).map_err(|e| format!("{kind}: {e}"))?;

    let mut endpoints: BTreeMap<FlowKey, (usize, usize, f64)> = BTreeMap::new();
    for dag in jobs {
        for f in dag.flows() {
            endpoints.insert(FlowKey::new(dag.job(), f.id), (f.src, f.dst, f.size_remaining));
        }
    }
    let mut delivered: BTreeMap<FlowKey, f64> = endpoints.keys().map(|&k| (k, 0.0)).collect();
    let mut last_end = 0.0f64;
    for iv in &log.intervals {
        if iv.end < iv.start || iv.start + 1e-12 < last_end {
            return Err(format!("{kind}: interval {}..{} out of order", iv.start, iv.end));
        }
        last_end = iv.end;
        let len = iv.end - iv.start;
        let mut rates = Vec::new();
        for (key, &rate) in iv.allocation.iter() {
            let &(src, dst, size) = endpoints.get(key).ok_or(format!("{kind}: rate on unknown flow {key}"))?;
            if rate < 0.0 {
                return Err(format!("{kind}: negative rate {rate} on {key}"));
            }
            let got = delivered.get_mut(key).expect("known flow");
            if rate > 0.0 && *got >= size * (1.0 - 1e-9) {
                return Err(format!("{kind}: rate {rate} on drained flow {key} at {}", iv.start));
            }
            *got += rate * len;
            rates.push((src, dst, rate));
        }
        let excess = worst_port_excess(rates, machines, 1.0);
        if excess > EPS {
            return Err(format!("{kind}: port over capacity by {excess} at {}", iv.start));
        }
    }
    for (key, &(_, _, size)) in &endpoints {
        let got = delivered[key];
        if (got - size).abs() > 1e-6 * size {
            return Err(format!("{kind}: flow {key} delivered {got} of {size}"));
        }
    }
    if log.events.windows(2).any(|w| w[1].time < w[0].time) {
        return Err(format!("{kind}: event times decrease"));
    }
    Ok(report)
}
