//! Strongly connected components (iterative Tarjan).

use crate::cayley::Csr;

/// Component id per vertex, numbered in reverse topological order.
pub fn components(adj: &Csr) -> (Vec<u32>, usize) {
    let n = adj.vertices();
    const UNSEEN: u32 = u32::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut comp = vec![UNSEEN; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    // call stack of (vertex, next edge offset)
    let mut calls: Vec<(usize, usize)> = Vec::new();
    let mut next_index = 0u32;
    let mut count = 0usize;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        calls.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut edge)) = calls.last_mut() {
            let row = adj.row(v);
            if *edge < row.len() {
                let w = row[*edge] as usize;
                *edge += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(parent, _)) = calls.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("component root is on the stack");
                    on_stack[w] = false;
                    comp[w] = count as u32;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    (comp, count)
}

/// Vertices of the largest component that carries a cycle, ascending, or
/// `None` if the graph is acyclic.
pub fn largest_cyclic_component(adj: &Csr) -> Option<Vec<u32>> {
    let (comp, count) = components(adj);
    let mut size = vec![0usize; count];
    for &c in &comp {
        size[c as usize] += 1;
    }
    let mut cyclic = vec![false; count];
    for v in 0..adj.vertices() {
        let c = comp[v];
        if size[c as usize] > 1 || adj.row(v).contains(&(v as u32)) {
            cyclic[c as usize] = true;
        }
    }
    // largest size, ties to the component holding the smallest vertex
    let mut best: Option<(usize, u32)> = None;
    let mut first_vertex = vec![usize::MAX; count];
    for (v, &c) in comp.iter().enumerate() {
        first_vertex[c as usize] = first_vertex[c as usize].min(v);
    }
    for c in 0..count {
        if !cyclic[c] {
            continue;
        }
        let better = match best {
            None => true,
            Some((s, b)) => {
                size[c] > s || (size[c] == s && first_vertex[c] < first_vertex[b as usize])
            }
        };
        if better {
            best = Some((size[c], c as u32));
        }
    }
    let (_, c) = best?;
    Some(
        comp.iter()
            .enumerate()
            .filter(|&(_, &k)| k == c)
            .map(|(v, _)| v as u32)
            .collect(),
    )
}
