//! The circulation kernel on its own: feasibility with lower bounds, optimal
//! circulations by cycle canceling, and conformal cycle decomposition.

use assignment_messages::flows::{
    decompose_conformal, feasible_circulation, improving_cycle, solve_min_cost, FlowNetwork,
};
use assignment_messages::rational::{int, ratio, Exact};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Two directed triangles sharing the arc a -> b.
    let mut net = FlowNetwork::new();
    let [a, b, c, d] = ["a", "b", "c", "d"].map(|l| net.add_vertex(l));
    net.add_arc(a, b, 0, 3, int(1))?;
    net.add_arc(b, c, -1, 2, ratio(-5, 2))?;
    net.add_arc(c, a, 0, 2, int(0))?;
    net.add_arc(b, d, 1, 2, int(-1))?;
    net.add_arc(d, a, -2, 2, ratio(1, 3))?;

    let start = feasible_circulation(&net).map_err(|cut| format!("infeasible: {cut:?}"))?;
    println!(
        "feasible start {:?}, cost {}",
        start.flow,
        Exact(&net.objective(&start))
    );

    let sol = solve_min_cost(&net).map_err(|cut| format!("infeasible: {cut:?}"))?;
    println!(
        "optimal flow {:?}, cost {}",
        sol.flow.flow,
        Exact(&sol.objective)
    );
    assert!(improving_cycle(&net, &sol.flow)?.is_none());

    for cycle in decompose_conformal(&net, &sol.flow)? {
        println!(
            "  cycle {:?}, cost {}",
            cycle.arcs,
            Exact(&cycle.cost(&net))
        );
    }

    let mut lonely = FlowNetwork::new();
    let [s, t] = ["s", "t"].map(|l| lonely.add_vertex(l));
    lonely.add_arc(s, t, 1, 1, int(0))?;
    let cut = feasible_circulation(&lonely).unwrap_err();
    println!("forced arc without a return path: violated cut {cut:?}");
    Ok(())
}
