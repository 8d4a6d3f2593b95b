use std::collections::VecDeque;

use super::boxes::Grid;
use super::obstacle::ObstacleSet;

/// Connected components of the free nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    pub count: usize,
    /// Component label per node; `None` on obstacle nodes.
    pub labels: Vec<Option<usize>>,
}

/// Labels the nodes with `free[node] == true` by face adjacency (`2n` neighbours).
pub fn label_components(grid: &Grid, free: &[bool]) -> Components {
    let mut labels = vec![None; grid.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for seed in 0..grid.len() {
        if !free[seed] || labels[seed].is_some() {
            continue;
        }
        labels[seed] = Some(count);
        queue.push_back(seed);
        while let Some(node) = queue.pop_front() {
            for axis in 0..grid.dim() {
                for offset in [-1, 1] {
                    if let Some(nb) = grid.neighbor(node, axis, offset) {
                        if free[nb] && labels[nb].is_none() {
                            labels[nb] = Some(count);
                            queue.push_back(nb);
                        }
                    }
                }
            }
        }
        count += 1;
    }
    Components { count, labels }
}

/// Components of the grid nodes outside `obstacle` (membership decided at `depth`).
pub fn complement_components(grid: &Grid, obstacle: &ObstacleSet, depth: u32) -> Components {
    let free: Vec<bool> = obstacle.mask(grid, depth).into_iter().map(|m| !m).collect();
    label_components(grid, &free)
}
