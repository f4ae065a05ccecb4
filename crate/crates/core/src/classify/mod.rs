//! Isomorphism classes, catalogues of standard fans, and closure searches
//! over blow-ups, blow-downs and flops.

pub mod catalog;
pub mod closure;
pub mod graph;
pub mod iso;
pub mod table1;

pub use catalog::{
    del_pezzo_fan, hirzebruch, product_fan, projective_bundle, projective_space, pseudo_del_pezzo_fan,
    pseudo_symmetric_catalog,
};
pub use closure::{f_closure, load_checkpoint, resume_closure, Audit, CheckpointConfig, Closure, ClosureOptions, Mode, Tally};
pub use graph::{EquivalenceGraph, GraphEdge, GraphNode, GraphSummary};
pub use iso::{are_isomorphic, canonical_key, canonical_key_with, find_isomorphism, lattice_map_for, IsoKey};
pub use table1::{match_table, parse_expectations, verify_table1_edges, Expectation, Table1Report};

use crate::fan::Fan;
use crate::polytope::{gorenstein_class_of, unimodular_equivalence, Polytope};
use crate::Result;

/// Seeds for the classification in dimension `d`: projective space, plus
/// the pseudo-symmetric classes in dimension 4, which are not reachable
/// from it.
pub fn standard_seeds(d: usize) -> Result<Vec<Fan>> {
    let mut seeds = vec![projective_space(d)?];
    if d == 4 {
        seeds.extend(pseudo_symmetric_catalog(4)?);
    }
    Ok(seeds)
}

/// Closure of [`standard_seeds`], with table labels attached in dimension 4.
pub fn classify(d: usize, mode: Mode, options: &ClosureOptions) -> Result<Closure> {
    let mut closure = f_closure(&standard_seeds(d)?, d, mode, options)?;
    if d == 4 && mode == Mode::Fano {
        table1::attach_fixture_labels(&mut closure.graph)?;
    }
    Ok(closure)
}

/// Reflexive polygons, one per unimodular class, obtained as the Gorenstein
/// classes of the weak Fano surfaces connected to the projective plane.
pub fn gorenstein_polygons(options: &ClosureOptions) -> Result<(Vec<Polytope>, Closure)> {
    let closure = f_closure(&[projective_space(2)?], 2, Mode::WeakFano, options)?;
    let mut out: Vec<Polytope> = Vec::new();
    for node in &closure.graph.nodes {
        let p = gorenstein_class_of(&node.fan)?;
        let mut seen = false;
        for q in &out {
            if unimodular_equivalence(&p, q)?.is_some() {
                seen = true;
                break;
            }
        }
        if !seen {
            out.push(p);
        }
    }
    Ok((out, closure))
}
