//! Adapted single-player Monte Carlo tree search.
//!
//! Nodes are scored A*-style: `f = g + h`, where `g` is the traversed
//! prefix length and `h` estimates the optimal completion. Rewards are
//! negated lengths (`Q = -f`), normalized per sibling set to `[0, 1]`
//! before the UCT comparison so the exploration constant is meaningful on
//! any length scale.
//!
//! Differences from game-playing MCTS, all deliberate:
//! - Simulation is a value lookup, not a random rollout: freshly expanded
//!   children are evaluated once by the completion estimate.
//! - Backpropagation carries the best (not average) reward in a subtree.
//! - A leaf is only expanded once its visit count reaches a threshold;
//!   colder visits re-backpropagate the leaf's cached evaluation. The root
//!   is expanded on the first playout regardless, so the final move choice
//!   always has candidates.
//! - The move returned after all playouts is the root child with the best
//!   raw reward, not the most-visited one.
//!
//! One tree is built per move (no subtree reuse); trees are single-owner
//! and searches across instances or start cities can run concurrently on
//! one immutable parameter snapshot.

use std::cell::RefCell;
use std::collections::HashMap;

use thiserror::Error;

use crate::instance::{PathState, Tour, TspInstance};
use crate::net::{embed_forward, value_h, EmbeddingParams};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("search from a terminal state")]
    TerminalRoot,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Search hyperparameters.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Playouts per move.
    pub playouts: usize,
    /// Exploration constant `C_p`.
    pub c_p: f64,
    /// Visit count at which a non-root leaf is expanded.
    pub expansion_threshold: u32,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            playouts: 400,
            c_p: 0.5,
            expansion_threshold: 40,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.playouts == 0 {
            return Err(SearchError::InvalidArgument("playouts must be >= 1".into()));
        }
        if !(self.c_p.is_finite() && self.c_p >= 0.0) {
            return Err(SearchError::InvalidArgument(format!(
                "c_p must be finite and >= 0, got {}",
                self.c_p
            )));
        }
        if self.expansion_threshold == 0 {
            return Err(SearchError::InvalidArgument(
                "expansion threshold must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Estimated cost (normalized units) to finish the tour from node `v`,
/// evaluated on the state with `v` already appended.
pub trait CompletionEstimate {
    fn remaining(&self, successor: &PathState<'_>, v: usize) -> f64;
}

/// The value network as completion estimate.
pub struct NetValue<'a> {
    params: &'a EmbeddingParams,
}

impl<'a> NetValue<'a> {
    pub fn new(params: &'a EmbeddingParams) -> Self {
        Self { params }
    }
}

impl CompletionEstimate for NetValue<'_> {
    fn remaining(&self, successor: &PathState<'_>, v: usize) -> f64 {
        let emb = embed_forward(self.params, successor);
        value_h(self.params, &emb, v)
    }
}

/// Exact remaining-optimum completion (dynamic programming over the
/// unvisited subset, memoized). Used to validate the search machinery
/// independently of any trained network; practical up to ~20 cities.
pub struct ExactCompletion<'a> {
    inst: &'a TspInstance,
    memo: RefCell<HashMap<(u32, u8, u8), f64>>,
}

impl<'a> ExactCompletion<'a> {
    pub fn new(inst: &'a TspInstance) -> Self {
        assert!(inst.n() <= 20, "exact completion limited to 20 cities");
        Self {
            inst,
            memo: RefCell::new(HashMap::new()),
        }
    }

    fn solve(&self, mask: u32, last: usize, first: usize) -> f64 {
        if mask == 0 {
            return self.inst.edge_weight(last, first);
        }
        let key = (mask, last as u8, first as u8);
        if let Some(&hit) = self.memo.borrow().get(&key) {
            return hit;
        }
        let mut best = f64::INFINITY;
        let mut bits = mask;
        while bits != 0 {
            let u = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let cand = self.inst.edge_weight(last, u) + self.solve(mask & !(1 << u), u, first);
            if cand < best {
                best = cand;
            }
        }
        self.memo.borrow_mut().insert(key, best);
        best
    }
}

impl CompletionEstimate for ExactCompletion<'_> {
    fn remaining(&self, successor: &PathState<'_>, v: usize) -> f64 {
        let mut mask = 0u32;
        for u in successor.remaining() {
            mask |= 1 << u;
        }
        self.solve(mask, v, successor.first()) / self.inst.length_unit()
    }
}

/// Node evaluation `f = g + h` for appending `v` to `state`, in normalized
/// units. At a terminal successor the estimate is replaced by the exact
/// closing edge, so `f` equals the full tour length exactly.
pub fn f_value<E: CompletionEstimate + ?Sized>(
    state: &mut PathState<'_>,
    v: usize,
    est: &E,
) -> f64 {
    assert!(!state.contains(v), "city {v} already traversed");
    state.push(v);
    let unit = state.instance().length_unit();
    let f = if state.is_terminal() {
        let closing = state.instance().edge_weight(v, state.first());
        (state.partial_length() + closing) / unit
    } else {
        state.partial_length() / unit + est.remaining(state, v)
    };
    state.pop();
    f
}

/// Rescale a sibling set of raw rewards to `[0, 1]`; a degenerate range
/// (single child or all-equal rewards) maps everything to 0.5.
pub fn normalize_rewards(raw: &[f64]) -> Vec<f64> {
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    raw.iter()
        .map(|&r| if max == min { 0.5 } else { (r - min) / (max - min) })
        .collect()
}

/// Modified UCT: pick the index maximizing
/// `q_norm + c_p * sqrt(ln(parent_visits) / visits)`; ties go to the
/// lowest index.
pub fn uct_select(q_norm: &[f64], visits: &[u32], parent_visits: u32, c_p: f64) -> usize {
    assert_eq!(q_norm.len(), visits.len());
    assert!(!q_norm.is_empty(), "selection over an empty sibling set");
    let ln_parent = (parent_visits as f64).ln();
    let mut best = f64::NEG_INFINITY;
    let mut pick = 0;
    for (i, (&q, &n)) in q_norm.iter().zip(visits).enumerate() {
        debug_assert!(n >= 1, "children must be visited before selection");
        let val = q + c_p * (ln_parent / n as f64).sqrt();
        if val > best {
            best = val;
            pick = i;
        }
    }
    pick
}

const NO_ACTION: usize = usize::MAX;

#[derive(Debug)]
struct Node {
    /// City appended by this node (`NO_ACTION` at the root).
    action: usize,
    visit_count: u32,
    /// Best raw reward `max(-f)` seen in this subtree.
    best_reward: f64,
    /// Reward rescaled within the current sibling set.
    q_normalized: f64,
    /// Cached evaluation of this node's own action.
    eval_reward: f64,
    children: Vec<usize>,
    expanded: bool,
    terminal: bool,
}

struct SearchTree<'a, 's, E: CompletionEstimate> {
    arena: Vec<Node>,
    state: PathState<'s>,
    est: &'a E,
    config: &'a SearchConfig,
}

impl<'a, 's, E: CompletionEstimate> SearchTree<'a, 's, E> {
    fn new(root_state: &PathState<'s>, est: &'a E, config: &'a SearchConfig) -> Self {
        let root = Node {
            action: NO_ACTION,
            visit_count: 0,
            best_reward: f64::NEG_INFINITY,
            q_normalized: 0.5,
            eval_reward: f64::NAN,
            children: Vec::new(),
            expanded: false,
            terminal: root_state.is_terminal(),
        };
        Self {
            arena: vec![root],
            state: root_state.clone(),
            est,
            config,
        }
    }

    fn select_child(&self, id: usize) -> usize {
        let node = &self.arena[id];
        assert!(node.expanded, "select_child on unexpanded node");
        let ln_parent = (node.visit_count as f64).ln();
        let mut best = f64::NEG_INFINITY;
        let mut pick = node.children[0];
        for &c in &node.children {
            let ch = &self.arena[c];
            let val = ch.q_normalized + self.config.c_p * (ln_parent / ch.visit_count as f64).sqrt();
            if val > best {
                best = val;
                pick = c;
            }
        }
        pick
    }

    fn normalize_children(&mut self, id: usize) {
        let children = std::mem::take(&mut self.arena[id].children);
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &c in &children {
            let r = self.arena[c].best_reward;
            min = min.min(r);
            max = max.max(r);
        }
        for &c in &children {
            let node = &mut self.arena[c];
            node.q_normalized = if max == min {
                0.5
            } else {
                (node.best_reward - min) / (max - min)
            };
        }
        self.arena[id].children = children;
    }

    /// Create and evaluate every child of `id`; the search state must be
    /// positioned at `id`. Returns the best child evaluation.
    fn expand(&mut self, id: usize) -> f64 {
        debug_assert!(!self.arena[id].expanded && !self.arena[id].terminal);
        let n = self.state.instance().n();
        let actions: Vec<usize> = self.state.remaining().collect();
        let mut best = f64::NEG_INFINITY;
        let mut children = Vec::with_capacity(actions.len());
        for v in actions {
            let reward = -f_value(&mut self.state, v, self.est);
            best = best.max(reward);
            children.push(self.arena.len());
            self.arena.push(Node {
                action: v,
                visit_count: 1,
                best_reward: reward,
                q_normalized: 0.5,
                eval_reward: reward,
                children: Vec::new(),
                expanded: false,
                terminal: self.state.len() + 1 == n,
            });
        }
        self.arena[id].children = children;
        self.arena[id].expanded = true;
        self.normalize_children(id);
        best
    }

    /// Increment visit counts and fold the reward into the best-reward
    /// chain along `path` (root first), then renormalize every affected
    /// sibling set.
    fn backprop(&mut self, path: &[usize], reward: f64) {
        for &id in path {
            let node = &mut self.arena[id];
            node.visit_count += 1;
            if reward > node.best_reward {
                node.best_reward = reward;
            }
        }
        for &id in &path[..path.len() - 1] {
            self.normalize_children(id);
        }
    }

    fn playout(&mut self, path_buf: &mut Vec<usize>) {
        path_buf.clear();
        path_buf.push(0);
        let mut node = 0;
        let mut depth = 0;
        while self.arena[node].expanded {
            let next = self.select_child(node);
            self.state.push(self.arena[next].action);
            depth += 1;
            path_buf.push(next);
            node = next;
        }
        let leaf = &self.arena[node];
        let reward = if leaf.terminal {
            leaf.eval_reward
        } else if node == 0 || leaf.visit_count >= self.config.expansion_threshold {
            self.expand(node)
        } else {
            // Below the expansion threshold the leaf is value-evaluated
            // again; the estimate is deterministic, so replay the cache.
            leaf.eval_reward
        };
        self.backprop(path_buf, reward);
        for _ in 0..depth {
            self.state.pop();
        }
    }

    fn run(&mut self) -> SearchOutcome {
        let mut path = Vec::with_capacity(self.state.instance().n());
        for _ in 0..self.config.playouts {
            self.playout(&mut path);
        }
        let root = &self.arena[0];
        let mut best = f64::NEG_INFINITY;
        let mut action = NO_ACTION;
        for &c in &root.children {
            let ch = &self.arena[c];
            if ch.best_reward > best {
                best = ch.best_reward;
                action = ch.action;
            }
        }
        let root_children = root
            .children
            .iter()
            .map(|&c| {
                let ch = &self.arena[c];
                RootChildStat {
                    action: ch.action,
                    visit_count: ch.visit_count,
                    best_reward: ch.best_reward,
                    q_normalized: ch.q_normalized,
                }
            })
            .collect();
        SearchOutcome {
            action,
            root_visits: root.visit_count,
            playouts: self.config.playouts,
            root_children,
        }
    }

    #[cfg(test)]
    fn node(&self, id: usize) -> &Node {
        &self.arena[id]
    }
}

/// Per-root-child statistics after a search, for tracing and tests.
#[derive(Debug, Clone)]
pub struct RootChildStat {
    pub action: usize,
    pub visit_count: u32,
    /// Raw normalized-length reward (`-f`), the Eq. 9 selection key.
    pub best_reward: f64,
    pub q_normalized: f64,
}

/// Result of one per-move search.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub action: usize,
    pub root_visits: u32,
    pub playouts: usize,
    pub root_children: Vec<RootChildStat>,
}

impl SearchOutcome {
    /// One line of the per-move trace log.
    pub fn trace_line(&self, move_index: usize) -> String {
        let children = self
            .root_children
            .iter()
            .map(|c| format!("{}:{}:{:.6}", c.action, c.visit_count, c.best_reward))
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "move={move_index}\tplayouts={}\tchosen={}\tchildren={children}",
            self.playouts, self.action
        )
    }
}

/// Run a full search from `root_state` and return the chosen city together
/// with root statistics.
pub fn search_full<E: CompletionEstimate>(
    root_state: &PathState<'_>,
    est: &E,
    config: &SearchConfig,
) -> Result<SearchOutcome, SearchError> {
    config.validate()?;
    if root_state.is_terminal() {
        return Err(SearchError::TerminalRoot);
    }
    let mut tree = SearchTree::new(root_state, est, config);
    Ok(tree.run())
}

/// Choose the next city from `root_state` (Eq. 9: the root child with the
/// best raw reward; ties go to the lowest city index).
pub fn search<E: CompletionEstimate>(
    root_state: &PathState<'_>,
    est: &E,
    config: &SearchConfig,
) -> Result<usize, SearchError> {
    Ok(search_full(root_state, est, config)?.action)
}

/// Construct a complete tour from `start`, one search per move with a
/// fresh tree each time.
pub fn solve_instance<E: CompletionEstimate>(
    inst: &TspInstance,
    est: &E,
    start: usize,
    config: &SearchConfig,
) -> Result<Tour, SearchError> {
    Ok(solve_instance_traced(inst, est, start, config)?.0)
}

/// [`solve_instance`] variant that also returns the per-move search
/// outcomes for trace logging.
pub fn solve_instance_traced<E: CompletionEstimate>(
    inst: &TspInstance,
    est: &E,
    start: usize,
    config: &SearchConfig,
) -> Result<(Tour, Vec<SearchOutcome>), SearchError> {
    let mut state = PathState::new(inst, start)
        .map_err(|e| SearchError::InvalidArgument(e.to_string()))?;
    let mut moves = Vec::with_capacity(inst.n() - 1);
    while !state.is_terminal() {
        let outcome = search_full(&state, est, config)?;
        state.push(outcome.action);
        moves.push(outcome);
    }
    let tour = state.to_tour().expect("terminal state");
    Ok((tour, moves))
}

/// Solve once per start city and keep the shortest tour; ties go to the
/// lowest start index.
pub fn best_of_starts<E: CompletionEstimate>(
    inst: &TspInstance,
    est: &E,
    config: &SearchConfig,
    starts: &[usize],
) -> Result<Tour, SearchError> {
    if starts.is_empty() {
        return Err(SearchError::InvalidArgument("no start cities given".into()));
    }
    let mut ordered: Vec<usize> = starts.to_vec();
    ordered.sort_unstable();
    ordered.dedup();
    let mut best: Option<(f64, Tour)> = None;
    for &start in &ordered {
        let tour = solve_instance(inst, est, start, config)?;
        let len = inst.tour_length(&tour);
        if best.as_ref().is_none_or(|(l, _)| len < *l) {
            best = Some((len, tour));
        }
    }
    Ok(best.expect("at least one start").1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_random, Point, TspInstance};
    use crate::oracles::{held_karp, nearest_neighbor};

    struct ZeroEstimate;
    impl CompletionEstimate for ZeroEstimate {
        fn remaining(&self, _successor: &PathState<'_>, _v: usize) -> f64 {
            0.0
        }
    }

    fn unit_square() -> TspInstance {
        TspInstance::from_points(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn normalize_rescales_linearly() {
        assert_eq!(normalize_rewards(&[2.0, 4.0, 6.0]), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn normalize_degenerate_ranges() {
        assert_eq!(normalize_rewards(&[3.0]), vec![0.5]);
        assert_eq!(normalize_rewards(&[-5.0, -5.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn uct_pure_exploitation_at_zero_cp() {
        let pick = uct_select(&[0.2, 0.9, 0.4], &[100, 1, 1], 102, 0.0);
        assert_eq!(pick, 1);
    }

    #[test]
    fn uct_exploration_prefers_rare_child() {
        let pick = uct_select(&[0.5, 0.5], &[1, 100], 101, 0.5);
        assert_eq!(pick, 0);
    }

    #[test]
    fn uct_worked_example() {
        // Raw rewards (-10, -8, -12) normalize to (0.5, 1, 0); equal visit
        // counts leave the exploration terms identical, so the -8 child
        // wins.
        let q = normalize_rewards(&[-10.0, -8.0, -12.0]);
        assert_eq!(q, vec![0.5, 1.0, 0.0]);
        let pick = uct_select(&q, &[10, 10, 10], 30, 0.5);
        assert_eq!(pick, 1);
    }

    #[test]
    fn uct_breaks_ties_toward_lowest_index() {
        let pick = uct_select(&[0.7, 0.7, 0.7], &[5, 5, 5], 15, 0.5);
        assert_eq!(pick, 0);
    }

    #[test]
    fn f_value_terminal_equals_tour_length_exactly() {
        let inst = gen_random(6, 44).unwrap();
        let mut state = PathState::from_visited(&inst, &[0, 2, 4, 1, 3]).unwrap();
        let f = f_value(&mut state, 5, &ZeroEstimate);
        let tour = Tour::new(vec![0, 2, 4, 1, 3, 5], 6).unwrap();
        let expect = inst.tour_length(&tour) / inst.length_unit();
        assert_eq!(f.to_bits(), expect.to_bits());
        // State restored by f_value.
        assert_eq!(state.visited(), &[0, 2, 4, 1, 3]);
    }

    #[test]
    fn f_value_with_zero_estimate_is_prefix_length() {
        let inst = gen_random(6, 45).unwrap();
        let mut state = PathState::from_visited(&inst, &[0, 3]).unwrap();
        let f = f_value(&mut state, 1, &ZeroEstimate);
        let g = (inst.edge_weight(0, 3) + inst.edge_weight(3, 1)) / inst.length_unit();
        assert!((f - g).abs() < 1e-15);
    }

    #[test]
    fn f_value_with_exact_oracle_attains_the_optimum() {
        for seed in 0..5u64 {
            let inst = gen_random(6, seed).unwrap();
            let opt = held_karp(&inst).unwrap().length / inst.length_unit();
            let oracle = ExactCompletion::new(&inst);
            let mut state = PathState::new(&inst, 0).unwrap();
            let best_f = state
                .remaining()
                .collect::<Vec<_>>()
                .into_iter()
                .map(|v| f_value(&mut state, v, &oracle))
                .fold(f64::INFINITY, f64::min);
            assert!(
                (best_f - opt).abs() <= 1e-12 * opt,
                "seed {seed}: best f {best_f} vs optimum {opt}"
            );
        }
    }

    #[test]
    fn search_returns_the_single_remaining_city() {
        let inst = unit_square();
        let state = PathState::from_visited(&inst, &[0, 1, 2]).unwrap();
        let cfg = SearchConfig {
            playouts: 5,
            ..SearchConfig::default()
        };
        assert_eq!(search(&state, &ZeroEstimate, &cfg).unwrap(), 3);
    }

    #[test]
    fn search_rejects_terminal_root() {
        let inst = unit_square();
        let state = PathState::from_visited(&inst, &[0, 1, 2, 3]).unwrap();
        let cfg = SearchConfig::default();
        assert!(matches!(
            search(&state, &ZeroEstimate, &cfg),
            Err(SearchError::TerminalRoot)
        ));
    }

    #[test]
    fn root_is_expanded_on_the_first_playout() {
        let inst = gen_random(7, 9).unwrap();
        let state = PathState::new(&inst, 0).unwrap();
        let cfg = SearchConfig {
            playouts: 1,
            ..SearchConfig::default()
        };
        let outcome = search_full(&state, &ZeroEstimate, &cfg).unwrap();
        assert_eq!(outcome.root_children.len(), 6);
        assert!(outcome.root_children.iter().all(|c| c.visit_count == 1));
        assert_eq!(outcome.root_visits, 1);
    }

    #[test]
    fn root_visit_count_equals_playouts() {
        let inst = gen_random(6, 10).unwrap();
        let state = PathState::new(&inst, 0).unwrap();
        let cfg = SearchConfig {
            playouts: 123,
            ..SearchConfig::default()
        };
        let outcome = search_full(&state, &ZeroEstimate, &cfg).unwrap();
        assert_eq!(outcome.root_visits, 123);
    }

    #[test]
    fn sibling_q_values_stay_in_unit_interval() {
        let inst = gen_random(8, 11).unwrap();
        let state = PathState::new(&inst, 0).unwrap();
        let cfg = SearchConfig {
            playouts: 200,
            ..SearchConfig::default()
        };
        let outcome = search_full(&state, &NetValue::new(&EmbeddingParams::init(16, 3)), &cfg)
            .unwrap();
        let qs: Vec<f64> = outcome.root_children.iter().map(|c| c.q_normalized).collect();
        assert!(qs.iter().all(|q| (0.0..=1.0).contains(q)));
        // Distinct rewards pin the extremes to exactly 0 and 1.
        let rewards: Vec<f64> = outcome.root_children.iter().map(|c| c.best_reward).collect();
        let distinct = rewards
            .iter()
            .any(|r| (r - rewards[0]).abs() > 1e-12);
        if distinct {
            assert!(qs.iter().any(|&q| q == 0.0));
            assert!(qs.iter().any(|&q| q == 1.0));
        }
    }

    #[test]
    fn expansion_gated_by_threshold_below_root() {
        let inst = gen_random(5, 21).unwrap();
        let state = PathState::new(&inst, 0).unwrap();
        let cfg = SearchConfig {
            playouts: 30,
            c_p: 0.5,
            expansion_threshold: 40,
        };
        let mut tree = SearchTree::new(&state, &ZeroEstimate, &cfg);
        let mut path = Vec::new();
        for _ in 0..cfg.playouts {
            tree.playout(&mut path);
        }
        // 30 playouts cannot push any root child to 40 visits.
        for &c in &tree.node(0).children {
            assert!(!tree.node(c).expanded);
            assert!(tree.node(c).children.is_empty());
        }
    }

    #[test]
    fn expansion_creates_all_children_at_threshold() {
        let inst = gen_random(5, 22).unwrap();
        let state = PathState::new(&inst, 0).unwrap();
        let cfg = SearchConfig {
            playouts: 13,
            c_p: 0.0,
            expansion_threshold: 3,
        };
        let mut tree = SearchTree::new(&state, &ZeroEstimate, &cfg);
        let mut path = Vec::new();
        for _ in 0..cfg.playouts {
            tree.playout(&mut path);
        }
        // With pure exploitation one child absorbs every playout and gets
        // expanded; it must have exactly |remaining| children, visit 1 each
        // at creation plus later descents.
        let expanded: Vec<usize> = tree
            .node(0)
            .children
            .iter()
            .copied()
            .filter(|&c| tree.node(c).expanded)
            .collect();
        assert_eq!(expanded.len(), 1);
        assert_eq!(tree.node(expanded[0]).children.len(), 3);
    }

    #[test]
    fn expanded_nodes_satisfy_the_count_identity() {
        // For an expanded non-root node: threshold re-evaluations plus the
        // creation visit give count = 1 + threshold + playouts-through,
        // i.e. count - sum(children) = 1 + threshold - #children.
        let inst = gen_random(6, 23).unwrap();
        let state = PathState::new(&inst, 0).unwrap();
        let cfg = SearchConfig {
            playouts: 400,
            c_p: 0.5,
            expansion_threshold: 10,
        };
        let params = EmbeddingParams::init(8, 2);
        let est = NetValue::new(&params);
        let mut tree = SearchTree::new(&state, &est, &cfg);
        let mut path = Vec::new();
        for _ in 0..cfg.playouts {
            tree.playout(&mut path);
        }
        let mut checked = 0;
        for id in 1..tree.arena.len() {
            let node = tree.node(id);
            if !node.expanded {
                continue;
            }
            let child_sum: u32 = node.children.iter().map(|&c| tree.node(c).visit_count).sum();
            let expect = 1 + cfg.expansion_threshold + child_sum - node.children.len() as u32;
            assert_eq!(node.visit_count, expect, "node {id}");
            checked += 1;
        }
        assert!(checked > 0, "no expanded non-root nodes exercised");
    }

    #[test]
    fn backprop_carries_best_reward_to_root() {
        let inst = gen_random(6, 31).unwrap();
        let state = PathState::new(&inst, 0).unwrap();
        let cfg = SearchConfig {
            playouts: 100,
            ..SearchConfig::default()
        };
        let mut tree = SearchTree::new(&state, &ZeroEstimate, &cfg);
        let mut path = Vec::new();
        for _ in 0..cfg.playouts {
            tree.playout(&mut path);
        }
        let root_best = tree.node(0).best_reward;
        let max_child = tree
            .node(0)
            .children
            .iter()
            .map(|&c| tree.node(c).best_reward)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(root_best, max_child);
    }

    #[test]
    fn zero_estimate_reduces_to_nearest_neighbor() {
        // With h = 0 the best reward in any subtree is the immediate
        // prefix cost, so the whole search degenerates to the greedy
        // nearest-completion rule.
        for seed in 0..5u64 {
            let inst = gen_random(7, seed).unwrap();
            let cfg = SearchConfig {
                playouts: 50,
                ..SearchConfig::default()
            };
            let tour = solve_instance(&inst, &ZeroEstimate, 0, &cfg).unwrap();
            let nn = nearest_neighbor(&inst, 0).unwrap();
            assert_eq!(tour.order, nn.tour.order, "seed {seed}");
            assert!(inst.tour_length(&tour) >= held_karp(&inst).unwrap().length - 1e-9);
        }
    }

    #[test]
    fn exact_oracle_recovers_optimal_tours() {
        for seed in 0..3u64 {
            let inst = gen_random(7, 100 + seed).unwrap();
            let oracle = ExactCompletion::new(&inst);
            let cfg = SearchConfig {
                playouts: 60,
                ..SearchConfig::default()
            };
            let tour = solve_instance(&inst, &oracle, 0, &cfg).unwrap();
            let opt = held_karp(&inst).unwrap();
            let len = inst.tour_length(&tour);
            assert!(
                (len - opt.length).abs() <= 1e-9 * opt.length,
                "seed {seed}: {len} vs {}",
                opt.length
            );
        }
    }

    #[test]
    fn solve_output_is_always_a_permutation() {
        let inst = gen_random(9, 55).unwrap();
        let cfg = SearchConfig {
            playouts: 30,
            ..SearchConfig::default()
        };
        let params = EmbeddingParams::init(8, 4);
        let tour = solve_instance(&inst, &NetValue::new(&params), 3, &cfg).unwrap();
        assert_eq!(tour.order[0], 3);
        assert!(Tour::new(tour.order.clone(), 9).is_ok());
    }

    #[test]
    fn two_city_instance_has_the_unique_tour() {
        let inst = gen_random(2, 8).unwrap();
        let cfg = SearchConfig {
            playouts: 3,
            ..SearchConfig::default()
        };
        let tour = solve_instance(&inst, &ZeroEstimate, 0, &cfg).unwrap();
        assert_eq!(tour.order, vec![0, 1]);
    }

    #[test]
    fn best_of_starts_dominates_single_start() {
        let inst = gen_random(8, 60).unwrap();
        let params = EmbeddingParams::init(8, 1);
        let est = NetValue::new(&params);
        let cfg = SearchConfig {
            playouts: 40,
            ..SearchConfig::default()
        };
        let all: Vec<usize> = (0..8).collect();
        let best = best_of_starts(&inst, &est, &cfg, &all).unwrap();
        let best_len = inst.tour_length(&best);
        for start in 0..8 {
            let single = solve_instance(&inst, &est, start, &cfg).unwrap();
            assert!(best_len <= inst.tour_length(&single) + 1e-12);
        }
        let only_zero = best_of_starts(&inst, &est, &cfg, &[0]).unwrap();
        let direct = solve_instance(&inst, &est, 0, &cfg).unwrap();
        assert_eq!(only_zero.order, direct.order);
    }

    #[test]
    fn best_of_starts_rejects_empty_set() {
        let inst = gen_random(4, 2).unwrap();
        let cfg = SearchConfig::default();
        assert!(best_of_starts(&inst, &ZeroEstimate, &cfg, &[]).is_err());
    }

    #[test]
    fn selection_is_invariant_under_coordinate_scaling() {
        // Eq. 3 sibling normalization removes any positive affine scale on
        // raw rewards, so a 10x blow-up of all coordinates cannot change
        // any decision.
        let base = gen_random(7, 70).unwrap();
        let scaled = TspInstance::new(
            base.points()
                .iter()
                .map(|p| Point::new(p.x * 10.0, p.y * 10.0))
                .collect(),
            base.coord_scale(),
            false,
        )
        .unwrap();
        let cfg = SearchConfig {
            playouts: 80,
            ..SearchConfig::default()
        };
        let tour_a = solve_instance(&base, &ZeroEstimate, 0, &cfg).unwrap();
        let tour_b = solve_instance(&scaled, &ZeroEstimate, 0, &cfg).unwrap();
        assert_eq!(tour_a.order, tour_b.order);
    }

    #[test]
    fn trace_line_mentions_children_and_choice() {
        let inst = gen_random(4, 5).unwrap();
        let state = PathState::new(&inst, 0).unwrap();
        let cfg = SearchConfig {
            playouts: 10,
            ..SearchConfig::default()
        };
        let outcome = search_full(&state, &ZeroEstimate, &cfg).unwrap();
        let line = outcome.trace_line(0);
        assert!(line.contains("playouts=10"));
        assert!(line.contains(&format!("chosen={}", outcome.action)));
    }
}
