//! The inverse tree of the map: which values step to a given one.
//!
//! Every k has the left (even) parent 2k. A right (odd) parent exists
//! exactly when k = 4 mod 6: then (k-1)/3 is an odd integer that steps to
//! k. The special case k = 4 has right parent 1, whose edge closes the
//! trivial 1 -> 4 -> 2 -> 1 cycle; it is hidden by default so the emitted
//! graph stays acyclic.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::core::{self, step};
use crate::nat::Nat;

/// A value with its parents in the inverse tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub value: Nat,
    /// 2·value; always steps to value.
    pub left_parent: Nat,
    /// (value-1)/3, present iff value = 4 mod 6 (which makes it odd).
    pub right_parent: Option<Nat>,
}

/// Whether k admits an odd parent.
pub fn has_right_parent(k: &Nat) -> bool {
    k.rem_u64(6) == 4
}

/// Both parents of n >= 1.
pub fn parents(n: &Nat) -> Result<TreeNode, core::Error> {
    if n.is_zero() {
        return Err(core::Error::ZeroInput);
    }
    let left_parent = n.checked_mul(&Nat::from(2u64));
    let right_parent = has_right_parent(n)
        .then(|| n.saturating_sub(&Nat::ONE).exact_div(&Nat::from(3u64)));
    debug_assert_eq!(step(&left_parent), *n);
    if let Some(r) = &right_parent {
        debug_assert!(r.is_odd());
        debug_assert_eq!(step(r), *n);
    }
    Ok(TreeNode {
        value: n.clone(),
        left_parent,
        right_parent,
    })
}

/// The right-parent branch of a fan: the odd parent, its own doubling
/// chain, and its right parent if it has one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RightBranch {
    pub value: Nat,
    pub doubling_chain: Vec<Nat>,
    pub right_parent: Option<Nat>,
}

/// A node's doubling ancestors plus one level of its odd parent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanReport {
    pub root: Nat,
    /// root·2, root·4, ..., root·2^depth — exactly `depth` entries.
    pub doubling_chain: Vec<Nat>,
    pub right_branch: Option<RightBranch>,
    /// True when the right parent was 1 (the cycle edge at root 4) and
    /// was hidden.
    pub trivial_cycle_suppressed: bool,
}

/// Number of doublings a fan expands by default.
pub const DEFAULT_FAN_DEPTH: u32 = 10;

fn doubling_chain(n: &Nat, depth: u32) -> Vec<Nat> {
    let mut chain = Vec::with_capacity(depth as usize);
    let mut cur = n.clone();
    let two = Nat::from(2u64);
    for _ in 0..depth {
        cur = cur.checked_mul(&two);
        chain.push(cur.clone());
    }
    chain
}

/// The fan of n >= 1: its doubling chain and one expanded right branch.
/// The cycle edge (right parent 1 of root 4) is reported via the
/// suppression flag unless `include_trivial_cycle` is set.
pub fn fan(n: &Nat, depth: u32, include_trivial_cycle: bool) -> Result<FanReport, core::Error> {
    let node = parents(n)?;
    let mut suppressed = false;
    let right_branch = node.right_parent.and_then(|m| {
        if m.is_one() && !include_trivial_cycle {
            suppressed = true;
            return None;
        }
        let right_parent = has_right_parent(&m)
            .then(|| m.saturating_sub(&Nat::ONE).exact_div(&Nat::from(3u64)));
        Some(RightBranch {
            doubling_chain: doubling_chain(&m, depth),
            right_parent,
            value: m,
        })
    });
    Ok(FanReport {
        root: n.clone(),
        doubling_chain: doubling_chain(n, depth),
        right_branch,
        trivial_cycle_suppressed: suppressed,
    })
}

/// Edges of the inverse tree grown breadth-first from `root` for `levels`
/// levels. Each edge (m, k) satisfies T(m) = k; left parents come before
/// right parents, so the order is deterministic.
pub fn grow_edges(root: &Nat, levels: u32, include_trivial_cycle: bool) -> Vec<(Nat, Nat)> {
    let mut edges = Vec::new();
    let mut frontier = vec![root.clone()];
    for _ in 0..levels {
        let mut next = Vec::new();
        for k in frontier {
            let node = parents(&k).expect("tree nodes are positive");
            edges.push((node.left_parent.clone(), k.clone()));
            next.push(node.left_parent);
            if let Some(m) = node.right_parent {
                if include_trivial_cycle || !m.is_one() {
                    edges.push((m.clone(), k.clone()));
                    next.push(m);
                }
            }
        }
        frontier = next;
    }
    edges
}

/// DOT digraph of the inverse tree, one edge per line, breadth-first from
/// `root`. With zero levels the graph holds the root node alone.
pub fn emit_dot(root: &Nat, levels: u32, include_trivial_cycle: bool) -> String {
    let edges = grow_edges(root, levels, include_trivial_cycle);
    let mut out = String::from("digraph collatz {\n");
    if edges.is_empty() {
        out.push_str(&format!("  {root};\n"));
    } else {
        for (m, k) in edges {
            out.push_str(&format!("  {m} -> {k};\n"));
        }
    }
    out.push_str("}\n");
    out
}

/// Reads whitespace-separated positive integers and prints the fan of
/// each. Ends cleanly at end of input; a malformed or non-positive token
/// prints a notice and ends the session, mirroring an input-driven loop
/// guard.
pub fn repl<R: BufRead, W: Write>(input: R, mut output: W) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        for token in line.split_whitespace() {
            let n: Nat = match token.parse() {
                Ok(n) => n,
                Err(_) => {
                    writeln!(output, "stopping: {token:?} is not a positive integer")?;
                    return Ok(());
                }
            };
            if n.is_zero() {
                writeln!(output, "stopping: {token:?} is not a positive integer")?;
                return Ok(());
            }
            let report = fan(&n, DEFAULT_FAN_DEPTH, false).expect("positive input");
            write_fan(&report, &mut output)?;
        }
    }
    Ok(())
}

/// Plain-text rendering of a fan, used by the navigation loop and the CLI.
pub fn write_fan<W: Write>(report: &FanReport, mut w: W) -> io::Result<()> {
    writeln!(w, "node {}", report.root)?;
    writeln!(w, "  doubling parents: {}", join(&report.doubling_chain))?;
    match &report.right_branch {
        Some(branch) => {
            writeln!(w, "  right parent: {}", branch.value)?;
            writeln!(w, "    doubling parents: {}", join(&branch.doubling_chain))?;
            if let Some(r) = &branch.right_parent {
                writeln!(w, "    right parent: {r}")?;
            }
        }
        None if report.trivial_cycle_suppressed => {
            writeln!(w, "  right parent: 1 (cycle edge, hidden)")?;
        }
        None => {
            writeln!(w, "  right parent: none")?;
        }
    }
    Ok(())
}

fn join(values: &[Nat]) -> String {
    values
        .iter()
        .map(Nat::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    #[test]
    fn parents_of_known_nodes() {
        let p = parents(&n(16)).unwrap();
        assert_eq!(p.left_parent, n(32));
        assert_eq!(p.right_parent, Some(n(5)));

        let p = parents(&n(8)).unwrap();
        assert_eq!(p.left_parent, n(16));
        assert_eq!(p.right_parent, None);

        let p = parents(&n(10)).unwrap();
        assert_eq!(p.left_parent, n(20));
        assert_eq!(p.right_parent, Some(n(3)));

        // 4 has the trivial right parent 1.
        let p = parents(&n(4)).unwrap();
        assert_eq!(p.right_parent, Some(n(1)));

        assert_eq!(parents(&Nat::ZERO), Err(core::Error::ZeroInput));
    }

    #[test]
    fn parent_soundness_and_completeness_to_1e5() {
        // Brute force: bucket every m <= B by T(m), then compare with the
        // parents operation per reachable k.
        let bound = 100_000u64;
        let mut brute: std::collections::HashMap<u64, Vec<u64>> = Default::default();
        for m in 1..=bound {
            let k = step(&n(m)).to_u64().expect("small values");
            brute.entry(k).or_default().push(m);
        }
        for k in 1..=bound {
            let node = parents(&n(k)).unwrap();
            let mut expected: Vec<u64> = std::iter::once(&node.left_parent)
                .chain(node.right_parent.as_ref())
                .filter_map(Nat::to_u64)
                .filter(|&m| m <= bound)
                .collect();
            expected.sort_unstable();
            let mut found = brute.remove(&k).unwrap_or_default();
            found.sort_unstable();
            assert_eq!(found, expected, "parents of {k}");
        }
    }

    #[test]
    fn right_parent_rule_matches_brute_force() {
        for k in 1u64..=10_000 {
            let claimed = has_right_parent(&n(k));
            let brute = k > 1 && (k - 1) % 3 == 0 && ((k - 1) / 3) % 2 == 1;
            assert_eq!(claimed, brute, "k = {k}");
        }
    }

    #[test]
    fn fan_of_one_has_no_right_branch() {
        let f = fan(&n(1), 4, false).unwrap();
        assert_eq!(f.doubling_chain, vec![n(2), n(4), n(8), n(16)]);
        assert!(f.right_branch.is_none());
        assert!(!f.trivial_cycle_suppressed);
    }

    #[test]
    fn fan_of_sixteen() {
        let f = fan(&n(16), 3, false).unwrap();
        assert_eq!(f.doubling_chain, vec![n(32), n(64), n(128)]);
        let branch = f.right_branch.unwrap();
        assert_eq!(branch.value, n(5));
        assert_eq!(branch.doubling_chain, vec![n(10), n(20), n(40)]);
        assert_eq!(branch.right_parent, None);
    }

    #[test]
    fn fan_of_four_hides_the_cycle_edge() {
        let f = fan(&n(4), 3, false).unwrap();
        assert!(f.right_branch.is_none());
        assert!(f.trivial_cycle_suppressed);

        let f = fan(&n(4), 3, true).unwrap();
        let branch = f.right_branch.unwrap();
        assert_eq!(branch.value, n(1));
        assert!(!f.trivial_cycle_suppressed);
    }

    #[test]
    fn fan_depth_defaults_to_ten_entries() {
        let f = fan(&n(3), DEFAULT_FAN_DEPTH, false).unwrap();
        assert_eq!(f.doubling_chain.len(), 10);
        assert_eq!(f.doubling_chain[9], n(3 * 1024));
    }

    #[test]
    fn dot_contains_both_parents_of_16() {
        let dot = emit_dot(&n(1), 5, false);
        assert!(dot.contains("  32 -> 16;\n"));
        assert!(dot.contains("  5 -> 16;\n"));
        assert!(dot.starts_with("digraph collatz {\n"));
        assert!(dot.ends_with("}\n"));
        // The suppressed cycle edge must not appear.
        assert!(!dot.contains("1 -> 4"));
    }

    #[test]
    fn dot_zero_levels_is_a_single_node() {
        assert_eq!(emit_dot(&n(1), 0, false), "digraph collatz {\n  1;\n}\n");
    }

    #[test]
    fn dot_from_9232() {
        let dot = emit_dot(&n(9232), 1, false);
        assert_eq!(
            dot,
            "digraph collatz {\n  18464 -> 9232;\n  3077 -> 9232;\n}\n"
        );
    }

    #[test]
    fn every_emitted_edge_steps_to_its_child() {
        for (m, k) in grow_edges(&n(1), 12, false) {
            assert_eq!(step(&m), k);
        }
    }

    #[test]
    fn dot_is_acyclic_without_the_cycle_edge() {
        // Depth-first search over the emitted adjacency; any back edge
        // would be a cycle of the map itself.
        let edges = grow_edges(&n(1), 16, false);
        let mut adjacency: std::collections::HashMap<String, Vec<String>> = Default::default();
        for (m, k) in &edges {
            adjacency
                .entry(m.to_string())
                .or_default()
                .push(k.to_string());
        }
        fn visit(
            node: &str,
            adjacency: &std::collections::HashMap<String, Vec<String>>,
            path: &mut Vec<String>,
            done: &mut std::collections::HashSet<String>,
        ) {
            if done.contains(node) {
                return;
            }
            assert!(!path.iter().any(|p| p == node), "cycle through {node}");
            path.push(node.to_string());
            for next in adjacency.get(node).into_iter().flatten() {
                visit(next, adjacency, path, done);
            }
            path.pop();
            done.insert(node.to_string());
        }
        let mut done = Default::default();
        for (m, _) in &edges {
            visit(&m.to_string(), &adjacency, &mut Vec::new(), &mut done);
        }

        // With the cycle edge admitted, 1 -> 4 -> 2 -> 1 appears.
        let with_cycle = grow_edges(&n(1), 3, true);
        assert!(with_cycle.contains(&(n(1), n(4))));
    }

    #[test]
    fn repl_prints_fans_and_stops_cleanly() {
        let mut out = Vec::new();
        repl(&b"16"[..], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("32"));
        assert!(text.contains("right parent: 5"));

        let mut out = Vec::new();
        repl(&b"8"[..], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("doubling parents: 16 32"));
        assert!(text.contains("right parent: none"));

        // Empty input: immediate clean exit, no output.
        let mut out = Vec::new();
        repl(&b""[..], &mut out).unwrap();
        assert!(out.is_empty());

        // Malformed token: notice, then graceful stop.
        let mut out = Vec::new();
        repl(&b"16 oops 8"[..], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("stopping"));
        assert!(!text.contains("node 8"));

        // Zero is non-positive.
        let mut out = Vec::new();
        repl(&b"0"[..], &mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().contains("stopping"));
    }
}
