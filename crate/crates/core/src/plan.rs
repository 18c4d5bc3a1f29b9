//! Multi-round pooled-testing procedure tree.
//!
//! Starting from the whole population, every round pools each subpopulation
//! at its own optimal size and splits it on the pooled result. A branch ends
//! when it has collected three negatives (members cleared), three positives
//! (members go to individual testing), when the running infection rate
//! exceeds the cutoff, or when pooling stops being worthwhile (optimal size
//! at 2 or below). Three-of-either-sign bounds the depth at five rounds.
//!
//! Infection rates and expected subpopulation sizes propagate analytically
//! through [`subpop_after_negative`] / [`subpop_after_positive`]; sizes stay
//! real-valued and are only rounded where batch counts are charged,
//! `ceil(N_i / n_i)` per subpopulation-round.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::optimizer::{optimal_batch_size, ObjectiveSpec};
use crate::prob::{
    subpop_after_negative, subpop_after_positive, BatchResult, ErrorModel, RoundState,
};

/// Default infection-rate cutoff above which a subpopulation is tested
/// individually.
pub const DEFAULT_RATE_CUTOFF: f64 = 0.30;

/// How members of a positive-terminal subpopulation are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalMode {
    /// One individual test per member.
    SingleTest,
    /// Up to three sequential individual tests, stopping at the first positive.
    SequentialTriple,
}

/// Why a branch stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    /// Three pooled negatives: members concluded uninfected.
    Cleared,
    /// Members go to individual testing.
    Individual(IndividualReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndividualReason {
    ThreePositives,
    RateAboveCutoff,
    BatchTooSmall,
}

pub type NodeId = usize;

/// One subpopulation in the tree, identified by its pooled-result history.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanNode {
    /// Pooled results accumulated so far; empty at the root.
    pub pattern: Vec<BatchResult>,
    /// Round in which this subpopulation is (or would be) pooled; 1-based.
    pub round: u32,
    pub infection_rate: f64,
    pub population: f64,
    /// Pool size for this round; `None` on terminal nodes, which are not pooled.
    pub batch_size: Option<u32>,
    pub terminal: Option<Terminal>,
    pub negative: Option<NodeId>,
    pub positive: Option<NodeId>,
}

impl PlanNode {
    /// Pooled tests charged to this node: `ceil(N / n)`, zero on terminals.
    pub fn batch_tests(&self) -> f64 {
        match self.batch_size {
            Some(n) => (self.population / f64::from(n)).ceil(),
            None => 0.0,
        }
    }

    pub fn pattern_string(&self) -> String {
        self.pattern.iter().map(|r| r.sign()).collect()
    }

    fn negatives(&self) -> usize {
        self.pattern.iter().filter(|r| **r == BatchResult::Negative).count()
    }

    fn positives(&self) -> usize {
        self.pattern.iter().filter(|r| **r == BatchResult::Positive).count()
    }
}

/// Expected test counts for a whole plan under a terminal mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestCounts {
    pub batch: f64,
    pub individual: f64,
    pub total: f64,
}

/// Procedure-level accuracy derived from the terminal subpopulations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcedureAccuracy {
    pub sensitivity: f64,
    pub specificity: f64,
    /// Alternative estimate: per-pattern miss rates weighted by terminal
    /// subpopulation sizes (the case-table route).
    pub case_weighted_sensitivity: f64,
}

/// Probabilities of concluding a person's sequential testing on the first,
/// second or third test, and the implied expected cost per person.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequentialTestModel {
    /// First test positive.
    pub s1: f64,
    /// First negative, second positive.
    pub s2: f64,
    /// Two negatives; the third test runs regardless of outcome.
    pub s3: f64,
    pub expected_tests_per_person: f64,
}

/// Per-person model for up-to-three sequential individual tests at infection
/// rate `p`. A person is concluded positive at the first positive test, so an
/// infected person is caught with probability `1 - beta^3` and a clean person
/// flagged with probability `1 - (1 - alpha)^3`.
pub fn sequential_model(p: f64, err: ErrorModel) -> SequentialTestModel {
    let a = err.alpha();
    let b = err.beta();
    let s1 = (1.0 - b) * p + a * (1.0 - p);
    let s2 = b * (1.0 - b) * p + (1.0 - a) * a * (1.0 - p);
    let s3 = 1.0 - s1 - s2;
    SequentialTestModel { s1, s2, s3, expected_tests_per_person: s1 + 2.0 * s2 + 3.0 * s3 }
}

/// The canonical twenty branch histories: ten cleared by three negatives,
/// ten sent to individual testing by three positives.
pub const CASE_PATTERNS: [&str; 20] = [
    "---", "--+-", "-+--", "+---", "--++-", "-+-+-", "-++--", "+--+-", "+-+--", "++---",
    "+++", "++-+", "+-++", "-+++", "++--+", "+-+-+", "+--++", "-++-+", "-+-++", "--+++",
];

/// False negative rate of each canonical case for an infected person, in case
/// order. Cleared cases miss with `beta^3 (1-beta)^j` (j pooled positives on
/// the way); individual-test cases miss only when all three sequential tests
/// fail: `(1-beta)^3 beta^(j+3)` (j pooled negatives on the way).
pub fn case_false_negative_rates(err: ErrorModel) -> [f64; 20] {
    let mut rates = [0.0; 20];
    for (slot, pattern) in rates.iter_mut().zip(CASE_PATTERNS) {
        let pos = pattern.chars().filter(|c| *c == '+').count() as i32;
        let neg = pattern.len() as i32 - pos;
        let path = err.beta().powi(neg) * (1.0 - err.beta()).powi(pos);
        let cleared = pos < 3;
        *slot = if cleared { path } else { path * err.beta().powi(3) };
    }
    rates
}

/// The full branching plan for one starting population.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    err: ErrorModel,
    rate_cutoff: f64,
    nodes: Vec<PlanNode>,
}

impl Plan {
    pub fn root(&self) -> &PlanNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &PlanNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[PlanNode] {
        &self.nodes
    }

    pub fn error_model(&self) -> ErrorModel {
        self.err
    }

    pub fn rate_cutoff(&self) -> f64 {
        self.rate_cutoff
    }

    pub fn terminals(&self) -> impl Iterator<Item = &PlanNode> {
        self.nodes.iter().filter(|n| n.terminal.is_some())
    }

    /// Pooled tests summed over all non-terminal nodes, each charged once.
    pub fn batch_tests(&self) -> f64 {
        self.nodes.iter().map(PlanNode::batch_tests).sum()
    }

    /// Pooled tests in the first round.
    pub fn first_round_batch_tests(&self) -> f64 {
        self.root().batch_tests()
    }

    /// Expected pooled, individual and total tests under `mode`.
    pub fn expected_test_counts(&self, mode: TerminalMode) -> TestCounts {
        let batch = self.batch_tests();
        let individual: f64 = self
            .terminals()
            .filter(|n| matches!(n.terminal, Some(Terminal::Individual(_))))
            .map(|n| match mode {
                TerminalMode::SingleTest => n.population,
                TerminalMode::SequentialTriple => {
                    n.population
                        * sequential_model(n.infection_rate, self.err).expected_tests_per_person
                }
            })
            .sum();
        TestCounts { batch, individual, total: batch + individual }
    }

    /// Sensitivity and specificity of the whole procedure under `mode`,
    /// from the expected infected/clean head counts reaching individual
    /// testing.
    pub fn analytic_accuracy(&self, mode: TerminalMode) -> ProcedureAccuracy {
        self.accuracy_from_reach(mode, |n| (n.population, n.infection_rate))
    }

    /// Same computation, but from terminal states rounded the way summary
    /// tables print them (whole persons, two-decimal rates). The published
    /// headline percentages are arithmetic over the printed table, so this
    /// variant reproduces them; [`Plan::analytic_accuracy`] carries the
    /// full-precision values.
    pub fn analytic_accuracy_tabulated(&self, mode: TerminalMode) -> ProcedureAccuracy {
        self.accuracy_from_reach(mode, |n| {
            (n.population.round(), (n.infection_rate * 100.0).round() / 100.0)
        })
    }

    fn accuracy_from_reach(
        &self,
        mode: TerminalMode,
        state: impl Fn(&PlanNode) -> (f64, f64),
    ) -> ProcedureAccuracy {
        let total_pop = self.root().population;
        let total_infected = total_pop * self.root().infection_rate;
        let total_clean = total_pop - total_infected;

        let mut infected_reach = 0.0;
        let mut clean_reach = 0.0;
        for node in self.terminals() {
            if matches!(node.terminal, Some(Terminal::Individual(_))) {
                let (population, rate) = state(node);
                let infected = population * rate;
                infected_reach += infected;
                clean_reach += population - infected;
            }
        }
        let (detect, false_flag) = match mode {
            TerminalMode::SingleTest => (1.0 - self.err.beta(), self.err.alpha()),
            TerminalMode::SequentialTriple => (
                self.err.sequential_sensitivity(3),
                self.err.sequential_false_positive_rate(3),
            ),
        };
        let sensitivity = if total_infected > 0.0 {
            infected_reach * detect / total_infected
        } else {
            1.0
        };
        let specificity = if total_clean > 0.0 {
            1.0 - clean_reach * false_flag / total_clean
        } else {
            1.0
        };
        ProcedureAccuracy {
            sensitivity,
            specificity,
            case_weighted_sensitivity: 1.0 - self.case_weighted_fn_rate(mode),
        }
    }

    /// Case-table estimate of the procedure's false negative rate: each
    /// terminal's per-pattern miss probability weighted by its subpopulation
    /// size. Normalized by N/10, which is the scaling that reproduces the
    /// published 3.33% / 3.25% figures (the nominal population divisor gives
    /// exactly one tenth of those).
    pub fn case_weighted_fn_rate(&self, mode: TerminalMode) -> f64 {
        let miss_factor = |terminal: Terminal| match (terminal, mode) {
            (Terminal::Cleared, _) => 1.0,
            (Terminal::Individual(_), TerminalMode::SingleTest) => self.err.beta(),
            (Terminal::Individual(_), TerminalMode::SequentialTriple) => self.err.beta().powi(3),
        };
        let weighted: f64 = self
            .terminals()
            .map(|n| {
                let pos = n.positives() as i32;
                let neg = n.negatives() as i32;
                let path = self.err.beta().powi(neg) * (1.0 - self.err.beta()).powi(pos);
                n.population * path * miss_factor(n.terminal.expect("terminal"))
            })
            .sum();
        weighted / (self.root().population / 10.0)
    }

    /// Text rendering: one block per terminal pattern with the per-round
    /// states along its path, then totals and accuracy for both modes.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let root = self.root();
        let _ = writeln!(
            out,
            "Pooled testing plan: p = {}, N = {}, alpha = {}, beta = {}, cutoff = {}",
            root.infection_rate,
            root.population,
            self.err.alpha(),
            self.err.beta(),
            self.rate_cutoff,
        );
        if let Some(n) = root.batch_size {
            let _ = writeln!(
                out,
                "Round 1: batch size {} -> {} pooled tests",
                n,
                root.batch_tests()
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<10} {:>5} {:>12} {:>10} {:>6}  disposition",
            "pattern", "round", "p", "N", "n"
        );

        let mut terminals: Vec<&PlanNode> = self.terminals().collect();
        terminals.sort_by_key(|n| terminal_sort_key(n));
        for node in terminals {
            for step in self.path_to(node) {
                let _ = writeln!(
                    out,
                    "{:<10} {:>5} {:>12.6} {:>10.1} {:>6}  {}",
                    step.pattern_string(),
                    step.round,
                    step.infection_rate,
                    step.population,
                    step.batch_size.map_or("-".to_string(), |n| n.to_string()),
                    describe_terminal(step.terminal),
                );
            }
            let _ = writeln!(out);
        }

        for (mode, name) in [
            (TerminalMode::SingleTest, "single individual test"),
            (TerminalMode::SequentialTriple, "up to 3 sequential tests"),
        ] {
            let counts = self.expected_test_counts(mode);
            let acc = self.analytic_accuracy(mode);
            let _ = writeln!(
                out,
                "[{name}] pooled {:.0} + individual {:.0} = {:.0} expected tests; \
                 sensitivity {:.4}, specificity {:.6}",
                counts.batch, counts.individual, counts.total, acc.sensitivity, acc.specificity,
            );
        }
        out
    }

    /// Nodes along the path from the root to `target`, root first.
    fn path_to<'a>(&'a self, target: &'a PlanNode) -> Vec<&'a PlanNode> {
        let mut path = Vec::with_capacity(target.pattern.len() + 1);
        let mut id = 0;
        path.push(&self.nodes[id]);
        for result in &target.pattern {
            let next = match result {
                BatchResult::Negative => self.nodes[id].negative,
                BatchResult::Positive => self.nodes[id].positive,
            };
            match next {
                Some(n) => {
                    path.push(&self.nodes[n]);
                    id = n;
                }
                None => break,
            }
        }
        path
    }
}

fn describe_terminal(terminal: Option<Terminal>) -> &'static str {
    match terminal {
        None => "",
        Some(Terminal::Cleared) => "cleared (3 negatives)",
        Some(Terminal::Individual(IndividualReason::ThreePositives)) => {
            "individual tests (3 positives)"
        }
        Some(Terminal::Individual(IndividualReason::RateAboveCutoff)) => {
            "individual tests (rate above cutoff)"
        }
        Some(Terminal::Individual(IndividualReason::BatchTooSmall)) => {
            "individual tests (pool size at floor)"
        }
    }
}

/// Cleared branches first (sorted negatives-first), then individual-test
/// branches (sorted positives-first), mirroring the natural reading order.
fn terminal_sort_key(node: &PlanNode) -> (u8, Vec<u8>) {
    let cleared = matches!(node.terminal, Some(Terminal::Cleared));
    let key: Vec<u8> = node
        .pattern
        .iter()
        .map(|r| match (cleared, r) {
            (true, BatchResult::Negative) | (false, BatchResult::Positive) => 0,
            _ => 1,
        })
        .collect();
    (u8::from(!cleared), key)
}

/// Expand the full procedure tree from a starting rate and population.
///
/// Subpopulations whose expected size rounds below one person are pruned.
pub fn build_plan(p1: f64, population: f64, err: ErrorModel, rate_cutoff: f64) -> Result<Plan> {
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(Error::InvalidProbability { name: "initial infection rate", value: p1 });
    }
    if !(rate_cutoff > 0.0 && rate_cutoff <= 1.0) {
        return Err(Error::InvalidCutoff { value: rate_cutoff });
    }

    let mut nodes: Vec<PlanNode> = Vec::new();
    nodes.push(make_node(Vec::new(), 1, p1, population, err, rate_cutoff)?);

    let mut queue = vec![0];
    while let Some(id) = queue.pop() {
        if nodes[id].terminal.is_some() {
            continue;
        }
        let state = RoundState::new(
            nodes[id].infection_rate,
            nodes[id].population,
            nodes[id].batch_size.expect("non-terminal node has a batch size"),
        );
        let round = nodes[id].round + 1;
        let pattern = nodes[id].pattern.clone();

        for (result, transition) in [
            (BatchResult::Negative, subpop_after_negative(&state, err)),
            (BatchResult::Positive, subpop_after_positive(&state, err)),
        ] {
            if transition.population.round() < 1.0 {
                continue;
            }
            let mut child_pattern = pattern.clone();
            child_pattern.push(result);
            let child = make_node(
                child_pattern,
                round,
                transition.infection_rate,
                transition.population,
                err,
                rate_cutoff,
            )?;
            let child_id = nodes.len();
            nodes.push(child);
            match result {
                BatchResult::Negative => nodes[id].negative = Some(child_id),
                BatchResult::Positive => nodes[id].positive = Some(child_id),
            }
            queue.push(child_id);
        }
    }

    Ok(Plan { err, rate_cutoff, nodes })
}

fn make_node(
    pattern: Vec<BatchResult>,
    round: u32,
    infection_rate: f64,
    population: f64,
    err: ErrorModel,
    rate_cutoff: f64,
) -> Result<PlanNode> {
    let mut node = PlanNode {
        pattern,
        round,
        infection_rate,
        population,
        batch_size: None,
        terminal: None,
        negative: None,
        positive: None,
    };
    if node.negatives() >= 3 {
        node.terminal = Some(Terminal::Cleared);
        return Ok(node);
    }
    if node.positives() >= 3 {
        node.terminal = Some(Terminal::Individual(IndividualReason::ThreePositives));
        return Ok(node);
    }
    if infection_rate > rate_cutoff {
        node.terminal = Some(Terminal::Individual(IndividualReason::RateAboveCutoff));
        return Ok(node);
    }
    match optimal_batch_size(&ObjectiveSpec::per_person(infection_rate, err)?) {
        Ok(best) if best.size > 2 => node.batch_size = Some(best.size),
        Ok(_) | Err(Error::BatchingNotBeneficial { .. }) => {
            node.terminal = Some(Terminal::Individual(IndividualReason::BatchTooSmall));
        }
        Err(e) => return Err(e),
    }
    Ok(node)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_paper() -> ErrorModel {
        ErrorModel::new(0.01, 0.15).unwrap()
    }

    fn plan(p: f64) -> Plan {
        build_plan(p, 100_000.0, err_paper(), DEFAULT_RATE_CUTOFF).unwrap()
    }

    #[test]
    fn low_rate_plan_matches_published_procedure() {
        let plan = plan(0.001);
        assert_eq!(plan.root().batch_size, Some(35));
        assert_eq!(plan.first_round_batch_tests(), 2858.0);

        let patterns: std::collections::BTreeSet<String> =
            plan.terminals().map(|n| n.pattern_string()).collect();
        let expected: std::collections::BTreeSet<String> =
            CASE_PATTERNS.iter().map(|s| s.to_string()).collect();
        assert_eq!(patterns, expected);

        let cleared = plan
            .terminals()
            .find(|n| n.pattern_string() == "---")
            .unwrap();
        assert!((cleared.population - 92_684.0).abs() < 2.0);

        let three_pos = plan
            .terminals()
            .find(|n| n.pattern_string() == "+++")
            .unwrap();
        assert!((three_pos.population - 206.0).abs() < 2.0);
        assert!((three_pos.infection_rate - 0.30).abs() < 0.005);
        assert_eq!(
            three_pos.terminal,
            Some(Terminal::Individual(IndividualReason::ThreePositives))
        );
    }

    #[test]
    fn one_percent_plan_headline_numbers() {
        let plan = plan(0.01);
        assert_eq!(plan.root().batch_size, Some(12));
        assert_eq!(plan.first_round_batch_tests(), 8334.0);

        let cleared = plan
            .terminals()
            .find(|n| n.pattern_string() == "---")
            .unwrap();
        assert!((cleared.population - 83_107.0).abs() < 3.0);
        assert!((cleared.infection_rate - 4e-5).abs() < 1e-5);
    }

    #[test]
    fn expected_counts_match_published_totals() {
        let plan = plan(0.001);
        let single = plan.expected_test_counts(TerminalMode::SingleTest);
        assert!((single.batch - 5696.0).abs() < 5696.0 * 0.01);
        assert!((single.individual - 448.0).abs() < 448.0 * 0.01);
        assert!((single.total - 6144.0).abs() < 6144.0 * 0.01);

        let seq = plan.expected_test_counts(TerminalMode::SequentialTriple);
        assert!((seq.total - 6851.0).abs() < 6851.0 * 0.01);

        let plan = super::tests::plan(0.01);
        let single = plan.expected_test_counts(TerminalMode::SingleTest);
        assert!((single.total - 22_436.0).abs() < 22_436.0 * 0.01);
        let seq = plan.expected_test_counts(TerminalMode::SequentialTriple);
        assert!((seq.individual - 7236.0).abs() < 7236.0 * 0.01);
        assert!((seq.total - 26_645.0).abs() < 26_645.0 * 0.01);
    }

    #[test]
    fn high_rate_root_is_immediately_terminal() {
        let plan = build_plan(0.5, 100_000.0, err_paper(), DEFAULT_RATE_CUTOFF).unwrap();
        assert_eq!(plan.nodes().len(), 1);
        assert_eq!(
            plan.root().terminal,
            Some(Terminal::Individual(IndividualReason::RateAboveCutoff))
        );
    }

    #[test]
    fn invalid_cutoff_rejected() {
        assert!(matches!(
            build_plan(0.01, 1000.0, err_paper(), 0.0),
            Err(Error::InvalidCutoff { .. })
        ));
        assert!(matches!(
            build_plan(0.01, 1000.0, err_paper(), 1.5),
            Err(Error::InvalidCutoff { .. })
        ));
    }

    #[test]
    fn terminal_partition_conserves_population_and_infected() {
        for p in [0.001, 0.01, 0.03] {
            let plan = plan(p);
            let pop: f64 = plan.terminals().map(|n| n.population).sum();
            assert!((pop - 100_000.0).abs() < 1e-6 * 100_000.0, "p={p} pop={pop}");
            let infected: f64 = plan
                .terminals()
                .map(|n| n.population * n.infection_rate)
                .sum();
            assert!((infected - 100_000.0 * p).abs() < 1e-6 * 100_000.0);
        }
    }

    #[test]
    fn sequential_model_published_rates() {
        let err = err_paper();
        assert!((err.sequential_sensitivity(3) - 0.996625).abs() < 1e-9);
        assert!((err.sequential_false_positive_rate(3) - 0.029701).abs() < 1e-9);

        let m = sequential_model(0.0, ErrorModel::new(0.0, 0.15).unwrap());
        assert_eq!(m.s1, 0.0);
        assert_eq!(m.s2, 0.0);
        assert_eq!(m.s3, 1.0);
        assert_eq!(m.expected_tests_per_person, 3.0);
    }

    #[test]
    fn case_rates_published_values() {
        let rates = case_false_negative_rates(err_paper());
        assert!((rates[0] - 0.003375).abs() < 1e-9);
        for r in &rates[1..4] {
            assert!((r - 0.00287).abs() < 5e-6);
        }
        for r in &rates[4..10] {
            assert!((r - 0.00244).abs() < 5e-6);
        }
        assert!((rates[10] - 0.00207).abs() < 5e-6);
        for r in &rates[11..14] {
            assert!((r - 0.00031).abs() < 5e-6);
        }
        for r in &rates[14..20] {
            assert!((r - 0.000047).abs() < 5e-7);
        }
    }

    #[test]
    fn case_rates_vanish_with_perfect_tests() {
        assert_eq!(case_false_negative_rates(ErrorModel::perfect()), [0.0; 20]);
    }

    #[test]
    fn analytic_accuracy_published_values() {
        let plan = plan(0.001);
        let single = plan.analytic_accuracy_tabulated(TerminalMode::SingleTest);
        assert!((single.sensitivity - 0.831).abs() < 1e-3, "{}", single.sensitivity);
        assert!((single.specificity - 0.99996).abs() < 1e-3);

        let seq = plan.analytic_accuracy_tabulated(TerminalMode::SequentialTriple);
        assert!((seq.sensitivity - 0.975).abs() < 1e-3, "{}", seq.sensitivity);
        assert!((seq.case_weighted_sensitivity - 0.9667).abs() < 1e-3);

        let plan = super::tests::plan(0.01);
        let seq = plan.analytic_accuracy_tabulated(TerminalMode::SequentialTriple);
        assert!((seq.sensitivity - 0.972).abs() < 1e-3, "{}", seq.sensitivity);
        assert!((seq.specificity - 0.9994).abs() < 1e-3);
    }

    #[test]
    fn exact_accuracy_is_rate_free_with_full_pattern_set() {
        // With all twenty canonical branches present, the infected mass
        // reaching individual tests is N p (1-b)^3 (1 + 3b + 6b^2), so the
        // exact sensitivity does not depend on the starting rate.
        let b: f64 = 0.15;
        let reach_share = (1.0 - b).powi(3) * (1.0 + 3.0 * b + 6.0 * b * b);
        for p in [0.001, 0.01] {
            let acc = plan(p).analytic_accuracy(TerminalMode::SingleTest);
            assert!(
                (acc.sensitivity - reach_share * (1.0 - b)).abs() < 1e-6,
                "p={p} sensitivity={}",
                acc.sensitivity
            );
            let seq = plan(p).analytic_accuracy(TerminalMode::SequentialTriple);
            assert!((seq.sensitivity - reach_share * (1.0 - b.powi(3))).abs() < 1e-6);
        }
    }

    #[test]
    fn render_includes_headline_values() {
        let text = plan(0.001).render();
        assert!(text.contains("batch size 35 -> 2858 pooled tests"));
        assert!(text.contains("---"));
        assert!(text.contains("cleared (3 negatives)"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn sequential_model_is_a_distribution(
                p in 0.0..=1.0f64,
                a in 0.0..0.4f64,
                b in 0.0..0.4f64,
            ) {
                let m = sequential_model(p, ErrorModel::new(a, b).unwrap());
                prop_assert!((m.s1 + m.s2 + m.s3 - 1.0).abs() < 1e-12);
                prop_assert!(m.expected_tests_per_person >= 1.0);
                prop_assert!(m.expected_tests_per_person <= 3.0);
            }

            // More pooled positives on a cleared path make the miss rarer.
            #[test]
            fn cleared_case_rates_strictly_decrease(b in 0.01..0.49f64) {
                let rates = case_false_negative_rates(ErrorModel::new(0.01, b).unwrap());
                prop_assert!(rates[0] > rates[1]);
                prop_assert!(rates[1] > rates[4]);
                prop_assert!(rates[4] > rates[10]);
                prop_assert!(rates[10] > rates[11]);
                prop_assert!(rates[11] > rates[14]);
            }
        }
    }
}
