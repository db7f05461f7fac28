use serde::Serialize;

use super::SparseMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SccDecomposition {
    /// Component of each vertex; ids follow the topological order.
    pub component_id: Vec<usize>,
    /// Vertices of each component, components in topological order (every
    /// cross-component edge goes from a lower to a higher id).
    pub components: Vec<Vec<usize>>,
    pub is_strongly_connected: bool,
}

/// Strongly connected components of the graph with an edge `i -> j` for each stored `A_ij`
/// (iterative Tarjan).
pub fn scc_decompose(a: &SparseMatrix) -> SccDecomposition {
    let n = a.n();
    let cols = a.col_indices();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut found: Vec<Vec<usize>> = Vec::new();
    let mut next = 0usize;
    // (vertex, next edge position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, a.row_range(root).start));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let end = a.row_range(v).end;
            if *pos < end {
                let w = cols[*pos];
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, a.row_range(w).start));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    found.push(comp);
                }
            }
        }
    }

    // Tarjan finishes sinks first.
    found.reverse();
    let mut component_id = vec![0usize; n];
    for (c, comp) in found.iter().enumerate() {
        for &v in comp {
            component_id[v] = c;
        }
    }
    SccDecomposition {
        is_strongly_connected: found.len() == 1,
        component_id,
        components: found,
    }
}
