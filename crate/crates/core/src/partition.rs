//! Moore-style partition refinement for letter-to-letter transducers.

use std::collections::HashMap;

/// Returns the coarsest partition of the states that is compatible with the
/// outputs and closed under transitions. Two states share a class iff they
/// induce the same map on words.
///
/// Classes are numbered in order of their first state, so the result is
/// deterministic.
pub fn refine(outputs: &[Vec<usize>], transitions: &[Vec<usize>]) -> Vec<usize> {
    let n = outputs.len();
    debug_assert_eq!(n, transitions.len());
    let mut class = number_by_key(n, |s| outputs[s].clone());
    let mut count = class.iter().copied().max().map_or(0, |m| m + 1);
    loop {
        let next = number_by_key(n, |s| {
            let mut key = Vec::with_capacity(1 + transitions[s].len());
            key.push(class[s]);
            key.extend(transitions[s].iter().map(|&t| class[t]));
            key
        });
        let next_count = next.iter().copied().max().map_or(0, |m| m + 1);
        if next_count == count {
            return next;
        }
        class = next;
        count = next_count;
    }
}

fn number_by_key(n: usize, key: impl Fn(usize) -> Vec<usize>) -> Vec<usize> {
    let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
    (0..n)
        .map(|s| {
            let next = ids.len();
            *ids.entry(key(s)).or_insert(next)
        })
        .collect()
}
