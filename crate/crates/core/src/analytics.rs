//! Training diagnostics: entropy statistics, token-frequency tables,
//! repetition ratio, clip-region classification, and avg@K / pass@K.
//!
//! Everything here is a pure function over immutable rollout logs or flag
//! vectors, with CSV emitters whose columns are stable for external
//! plotting. Region classification reuses the loss geometry from the
//! objective module.

use crate::objective::{clip_region_for, ClipRegion, ObjectiveConfig, TokenClass};
use crate::rollout::RolloutLogRecord;
use std::collections::HashMap;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("no records")]
    Empty,
    #[error("clip regions are defined for the archer objective; got {0}")]
    NotArcher(&'static str),
    #[error("ratio must be positive, got {0}")]
    BadRatio(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AnalyticsError>;

// ---- entropy statistics -----------------------------------------------------

/// Per-response entropy summary within one step's rollout log.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseEntropy {
    pub prompt_id: u64,
    pub response_index: u32,
    pub token_count: usize,
    pub mean_entropy: f64,
    /// Fraction of tokens at or above the batch-level rho-quantile.
    pub frac_high_batch_tau: f64,
    /// Fraction of tokens at or above this response's own rho-quantile.
    pub frac_high_response_tau: f64,
}

/// Entropy statistics at batch, prompt, and response level.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyStats {
    /// Token-weighted mean over every token in the batch.
    pub batch_mean: f64,
    /// Batch-level rho-quantile over all tokens pooled.
    pub batch_tau: f64,
    /// Token-weighted mean entropy per prompt, keyed by prompt id.
    pub prompt_means: Vec<(u64, f64)>,
    pub responses: Vec<ResponseEntropy>,
}

/// Compute batch/prompt/response entropy statistics for one step's records
/// using quantile level `rho` for both threshold flavors.
pub fn entropy_stats(records: &[RolloutLogRecord], rho: f64) -> Result<EntropyStats> {
    if records.is_empty() || records.iter().all(|r| r.entropies.is_empty()) {
        return Err(AnalyticsError::Empty);
    }
    let all: Vec<f64> = records.iter().flat_map(|r| r.entropies.iter().copied()).collect();
    let batch_mean = all.iter().sum::<f64>() / all.len() as f64;
    let batch_tau = crate::objective::entropy_quantile(&all, rho).expect("non-empty");

    let mut prompt_acc: Vec<(u64, f64, usize)> = Vec::new();
    let mut responses = Vec::with_capacity(records.len());
    for rec in records {
        let n = rec.entropies.len();
        if n == 0 {
            continue;
        }
        let sum: f64 = rec.entropies.iter().sum();
        match prompt_acc.iter_mut().find(|(id, _, _)| *id == rec.prompt_id) {
            Some((_, s, c)) => {
                *s += sum;
                *c += n;
            }
            None => prompt_acc.push((rec.prompt_id, sum, n)),
        }
        let tau = crate::objective::entropy_quantile(&rec.entropies, rho).expect("non-empty");
        let high_batch = rec.entropies.iter().filter(|&&e| e >= batch_tau).count();
        let high_resp = rec.entropies.iter().filter(|&&e| e >= tau).count();
        responses.push(ResponseEntropy {
            prompt_id: rec.prompt_id,
            response_index: rec.response_index,
            token_count: n,
            mean_entropy: sum / n as f64,
            frac_high_batch_tau: high_batch as f64 / n as f64,
            frac_high_response_tau: high_resp as f64 / n as f64,
        });
    }
    let prompt_means = prompt_acc
        .into_iter()
        .map(|(id, s, c)| (id, s / c as f64))
        .collect();
    Ok(EntropyStats {
        batch_mean,
        batch_tau,
        prompt_means,
        responses,
    })
}

// ---- token frequency tables ---------------------------------------------

/// Ranked `(token, count)` tables of the corpus-wide most frequent tokens
/// among each response's `top_k` highest-entropy occurrences (first table)
/// and `top_k` lowest-entropy occurrences (second). Tokens appearing fewer
/// than `min_count` times are dropped. Ties rank by token id.
pub fn token_frequency_report(
    records: &[RolloutLogRecord],
    top_k_per_response: usize,
    min_count: usize,
) -> (Vec<(u32, usize)>, Vec<(u32, usize)>) {
    let mut high: HashMap<u32, usize> = HashMap::new();
    let mut low: HashMap<u32, usize> = HashMap::new();
    for rec in records {
        let n = rec.tokens.len().min(rec.entropies.len());
        if n == 0 {
            continue;
        }
        let mut order: Vec<usize> = (0..n).collect();
        // Descending entropy; ties by position for determinism.
        order.sort_by(|&a, &b| {
            rec.entropies[b]
                .partial_cmp(&rec.entropies[a])
                .expect("finite entropies")
                .then(a.cmp(&b))
        });
        for &i in order.iter().take(top_k_per_response) {
            *high.entry(rec.tokens[i]).or_insert(0) += 1;
        }
        for &i in order.iter().rev().take(top_k_per_response) {
            *low.entry(rec.tokens[i]).or_insert(0) += 1;
        }
    }
    let rank = |m: HashMap<u32, usize>| -> Vec<(u32, usize)> {
        let mut v: Vec<(u32, usize)> = m.into_iter().filter(|&(_, c)| c >= min_count).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    };
    (rank(high), rank(low))
}

// ---- repetition ratio ------------------------------------------------------

/// Fraction of duplicated n-grams: `1 - unique / total`, or 0 when the
/// sequence has fewer than `n` tokens.
pub fn repetition_ratio(tokens: &[u32], n: usize) -> f64 {
    assert!(n >= 1, "n-gram size must be positive");
    if tokens.len() < n {
        return 0.0;
    }
    let total = tokens.len() - n + 1;
    let mut seen: Vec<&[u32]> = tokens.windows(n).collect();
    seen.sort_unstable();
    seen.dedup();
    1.0 - seen.len() as f64 / total as f64
}

// ---- clip regions ------------------------------------------------------

/// Sign of a token's advantage, as a histogram axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdvantageSign {
    Positive,
    Negative,
}

impl AdvantageSign {
    pub fn of(advantage: f64) -> AdvantageSign {
        if advantage >= 0.0 {
            AdvantageSign::Positive
        } else {
            AdvantageSign::Negative
        }
    }

    pub fn index(self) -> usize {
        match self {
            AdvantageSign::Positive => 0,
            AdvantageSign::Negative => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AdvantageSign::Positive => "positive",
            AdvantageSign::Negative => "negative",
        }
    }
}

/// Classify one token into a clip region under archer geometry. The region
/// partition is exhaustive: every (ratio, class, sign) maps to exactly one
/// label. Sign selects which extension is optimization-active (E adds
/// reward signal when advantage > 0, F adds penalty when advantage < 0)
/// and is tracked as a separate histogram axis.
pub fn clip_region(
    r: f64,
    _advantage_sign: AdvantageSign,
    token_class: TokenClass,
    cfg: &ObjectiveConfig,
) -> Result<ClipRegion> {
    if cfg.algorithm != crate::objective::Algorithm::Archer {
        return Err(AnalyticsError::NotArcher(cfg.algorithm.name()));
    }
    if !(r > 0.0) {
        return Err(AnalyticsError::BadRatio(r));
    }
    Ok(clip_region_for(r, token_class, cfg.eps_reasoning, cfg.eps_knowledge))
}

/// Token counts per (region, token class, advantage sign).
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ClipRegionHistogram {
    /// Indexed `[region][class][sign]` with the enum `index()` orders.
    pub counts: [[[u64; 2]; 2]; 5],
}

impl ClipRegionHistogram {
    pub fn record(&mut self, region: ClipRegion, class: TokenClass, sign: AdvantageSign) {
        self.counts[region.index()][class_index(class)][sign.index()] += 1;
    }

    pub fn count(&self, region: ClipRegion, class: TokenClass, sign: AdvantageSign) -> u64 {
        self.counts[region.index()][class_index(class)][sign.index()]
    }

    pub fn region_total(&self, region: ClipRegion) -> u64 {
        self.counts[region.index()].iter().flatten().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().flatten().sum()
    }

    pub fn merge(&mut self, other: &ClipRegionHistogram) {
        for (a, b) in self
            .counts
            .iter_mut()
            .flatten()
            .flatten()
            .zip(other.counts.iter().flatten().flatten())
        {
            *a += b;
        }
    }
}

pub fn class_index(class: TokenClass) -> usize {
    match class {
        TokenClass::Reasoning => 0,
        TokenClass::Knowledge => 1,
    }
}

pub fn class_name(class: TokenClass) -> &'static str {
    match class {
        TokenClass::Reasoning => "reasoning",
        TokenClass::Knowledge => "knowledge",
    }
}

// ---- avg@K / pass@K ---------------------------------------------------------

/// Mean correctness over the K drawn samples of one instance.
pub fn avg_at_k(flags: &[bool]) -> f64 {
    assert!(!flags.is_empty(), "avg@K needs at least one sample");
    flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64
}

/// 1 iff any of the K drawn samples is correct.
pub fn pass_at_k(flags: &[bool]) -> f64 {
    assert!(!flags.is_empty(), "pass@K needs at least one sample");
    if flags.iter().any(|&f| f) {
        1.0
    } else {
        0.0
    }
}

// ---- evaluation harness ------------------------------------------------------

/// Correctness flags for K sampled completions of each instance, drawn at
/// the given temperature with seeds derived from `(seed, instance, k)`.
pub fn evaluate_policy(
    params: &crate::policy::PolicyParams,
    vocab: &crate::envs::Vocab,
    instances: &[crate::envs::TaskInstance],
    k: usize,
    temperature: f64,
    seed: u64,
) -> std::result::Result<Vec<Vec<bool>>, crate::policy::PolicyError> {
    use rayon::prelude::*;
    assert!(k >= 1, "K must be >= 1");
    let sampling = crate::policy::SamplingConfig {
        temperature,
        top_p: 1.0,
        max_new_tokens: params
            .config()
            .max_seq_len
            .saturating_sub(instances.iter().map(|i| i.prompt.len()).max().unwrap_or(0))
            .min(16),
        stop_token: vocab.stop_token(),
        greedy: false,
    };
    instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let mut flags = Vec::with_capacity(k);
            for draw in 0..k {
                let s = crate::rng::derive_seed(seed, crate::rng::Stream::Eval, i as u64, draw as u64);
                let resp = crate::policy::sample_response(params, &inst.prompt, &sampling, s)?;
                let mut full = inst.prompt.clone();
                full.extend_from_slice(&resp.tokens);
                flags.push(crate::envs::is_equivalent(vocab, &full, &inst.ground_truth));
            }
            Ok(flags)
        })
        .collect()
}

/// Summarize per-instance flags into per-scope rows (mean avg@K and
/// pass@K over instances).
pub fn summarize_eval(
    scopes: &[(String, Vec<Vec<bool>>)],
    k: usize,
) -> Vec<EvalRow> {
    let mut rows: Vec<EvalRow> = scopes
        .iter()
        .map(|(scope, flags)| EvalRow {
            scope: scope.clone(),
            instances: flags.len(),
            k,
            avg_at_k: flags.iter().map(|f| avg_at_k(f)).sum::<f64>() / flags.len().max(1) as f64,
            pass_at_k: flags.iter().map(|f| pass_at_k(f)).sum::<f64>() / flags.len().max(1) as f64,
        })
        .collect();
    if scopes.len() > 1 {
        let all: Vec<&Vec<bool>> = scopes.iter().flat_map(|(_, f)| f.iter()).collect();
        rows.push(EvalRow {
            scope: "overall".into(),
            instances: all.len(),
            k,
            avg_at_k: all.iter().map(|f| avg_at_k(f)).sum::<f64>() / all.len().max(1) as f64,
            pass_at_k: all.iter().map(|f| pass_at_k(f)).sum::<f64>() / all.len().max(1) as f64,
        });
    }
    rows
}

// ---- CSV emitters -----------------------------------------------------------

/// `entropy_stats.csv`: one `batch` row per step, then one `response` row
/// per response. Empty fields where a column does not apply.
pub fn write_entropy_stats_csv<W: Write>(
    w: &mut W,
    per_step: &[(u64, EntropyStats)],
) -> Result<()> {
    writeln!(
        w,
        "step,level,prompt_id,response_index,token_count,mean_entropy,batch_tau,frac_high_batch_tau,frac_high_response_tau"
    )?;
    for (step, stats) in per_step {
        writeln!(
            w,
            "{step},batch,,,{},{},{},,",
            stats.responses.iter().map(|r| r.token_count).sum::<usize>(),
            stats.batch_mean,
            stats.batch_tau
        )?;
        for (prompt_id, mean) in &stats.prompt_means {
            writeln!(w, "{step},prompt,{prompt_id},,,{mean},,,")?;
        }
        for r in &stats.responses {
            writeln!(
                w,
                "{step},response,{},{},{},{},,{},{}",
                r.prompt_id,
                r.response_index,
                r.token_count,
                r.mean_entropy,
                r.frac_high_batch_tau,
                r.frac_high_response_tau
            )?;
        }
    }
    Ok(())
}

/// `regions.csv`: token counts per (step, region, class, sign).
pub fn write_regions_csv<W: Write>(
    w: &mut W,
    per_step: &[(u64, ClipRegionHistogram)],
) -> Result<()> {
    writeln!(w, "step,region,token_class,advantage_sign,count")?;
    for (step, hist) in per_step {
        for region in ClipRegion::ALL {
            for class in [TokenClass::Reasoning, TokenClass::Knowledge] {
                for sign in [AdvantageSign::Positive, AdvantageSign::Negative] {
                    writeln!(
                        w,
                        "{step},{},{},{},{}",
                        region.name(),
                        class_name(class),
                        sign.name(),
                        hist.count(region, class, sign)
                    )?;
                }
            }
        }
    }
    Ok(())
}

/// `frequency_high.csv` / `frequency_low.csv`: ranked token counts. The
/// token text column is filled when a symbol table is supplied.
pub fn write_frequency_csv<W: Write>(
    w: &mut W,
    table: &[(u32, usize)],
    symbols: Option<&[char]>,
) -> Result<()> {
    writeln!(w, "rank,token_id,token_text,count")?;
    for (rank, (token, count)) in table.iter().enumerate() {
        let text = symbols
            .and_then(|s| s.get(*token as usize))
            .map(|c| c.to_string())
            .unwrap_or_default();
        writeln!(w, "{},{token},{text},{count}", rank + 1)?;
    }
    Ok(())
}

/// One scope line of `eval.csv` (a task kind or the overall summary).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub scope: String,
    pub instances: usize,
    pub k: usize,
    pub avg_at_k: f64,
    pub pass_at_k: f64,
}

/// `eval.csv`: avg@K / pass@K per task and overall.
pub fn write_eval_csv<W: Write>(w: &mut W, rows: &[EvalRow]) -> Result<()> {
    writeln!(w, "scope,instances,k,avg_at_k,pass_at_k")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.scope, r.instances, r.k, r.avg_at_k, r.pass_at_k
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Algorithm;

    fn record(prompt_id: u64, response_index: u32, entropies: Vec<f64>) -> RolloutLogRecord {
        RolloutLogRecord {
            step: 0,
            prompt_id,
            response_index,
            prompt_tokens: vec![0],
            tokens: (0..entropies.len() as u32).collect(),
            logprobs_old: vec![-1.0; entropies.len()],
            entropies,
            reward: 0.0,
            correct: false,
            truncated: false,
            advantage: 0.0,
            entropy_threshold: 0.0,
            token_classes: vec![],
        }
    }

    #[test]
    fn entropy_stats_single_response_collapses_levels() {
        let recs = vec![record(0, 0, vec![1.0, 2.0, 3.0])];
        let s = entropy_stats(&recs, 0.8).unwrap();
        assert!((s.batch_mean - 2.0).abs() < 1e-12);
        assert_eq!(s.prompt_means, vec![(0, 2.0)]);
        assert_eq!(s.responses[0].mean_entropy, 2.0);
    }

    #[test]
    fn entropy_stats_weighted_mean_identity() {
        let recs = vec![
            record(0, 0, vec![1.0, 2.0]),
            record(0, 1, vec![4.0]),
            record(1, 0, vec![0.5, 0.5, 0.5]),
        ];
        let s = entropy_stats(&recs, 0.8).unwrap();
        let weighted: f64 = s
            .responses
            .iter()
            .map(|r| r.mean_entropy * r.token_count as f64)
            .sum::<f64>()
            / s.responses.iter().map(|r| r.token_count).sum::<usize>() as f64;
        assert!((s.batch_mean - weighted).abs() < 1e-10);
    }

    #[test]
    fn entropy_stats_identical_responses_have_equal_fractions() {
        let recs = vec![
            record(0, 0, vec![1.0, 2.0, 3.0, 4.0]),
            record(1, 0, vec![1.0, 2.0, 3.0, 4.0]),
        ];
        let s = entropy_stats(&recs, 0.5).unwrap();
        for r in &s.responses {
            assert!((r.frac_high_batch_tau - r.frac_high_response_tau).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_stats_low_entropy_response_in_high_batch() {
        // Nine spread-out high-entropy tokens and one tight low-entropy
        // response: under the batch threshold almost nothing in the low
        // response is "high", under its own threshold the usual 1 - rho is.
        let high: Vec<f64> = (0..9).map(|i| 2.0 + i as f64 * 0.1).collect();
        let low: Vec<f64> = (0..9).map(|i| 0.1 + i as f64 * 0.01).collect();
        let recs = vec![record(0, 0, high), record(1, 0, low)];
        let s = entropy_stats(&recs, 0.8).unwrap();
        let low_resp = &s.responses[1];
        // Sort oracle: batch tau is above every low-response token.
        assert_eq!(low_resp.frac_high_batch_tau, 0.0);
        // h = 8 * 0.8 = 6.4 -> tau between x6 and x7 -> 2 of 9 at or above.
        assert!((low_resp.frac_high_response_tau - 2.0 / 9.0).abs() < 1e-12);
        assert!(low_resp.frac_high_batch_tau < low_resp.frac_high_response_tau);
    }

    #[test]
    fn entropy_stats_rejects_empty() {
        assert!(matches!(entropy_stats(&[], 0.8), Err(AnalyticsError::Empty)));
    }

    #[test]
    fn frequency_tables_rank_constructed_fixture() {
        // Token 7 always carries maximal entropy; token 1 always minimal.
        let mut recs = Vec::new();
        for i in 0..12 {
            let mut r = record(i, 0, vec![0.1, 3.0, 1.0]);
            r.tokens = vec![1, 7, 2];
            recs.push(r);
        }
        let (high, low) = token_frequency_report(&recs, 1, 10);
        assert_eq!(high, vec![(7, 12)]);
        assert_eq!(low, vec![(1, 12)]);
        // min_count larger than any count: empty tables.
        let (high, low) = token_frequency_report(&recs, 1, 13);
        assert!(high.is_empty() && low.is_empty());
    }

    #[test]
    fn frequency_tables_match_recount_oracle() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut recs = Vec::new();
        for i in 0..50 {
            let n = rng.gen_range(3..12);
            let tokens: Vec<u32> = (0..n).map(|_| rng.gen_range(0..8)).collect();
            let entropies: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.5)).collect();
            let mut r = record(i, 0, entropies);
            r.tokens = tokens;
            recs.push(r);
        }
        let top_k = 3;
        let (high, _) = token_frequency_report(&recs, top_k, 2);
        // Brute-force recount.
        let mut counts: HashMap<u32, usize> = HashMap::new();
        for r in &recs {
            let mut idx: Vec<usize> = (0..r.tokens.len()).collect();
            idx.sort_by(|&a, &b| r.entropies[b].partial_cmp(&r.entropies[a]).unwrap().then(a.cmp(&b)));
            for &i in idx.iter().take(top_k) {
                *counts.entry(r.tokens[i]).or_insert(0) += 1;
            }
        }
        for &(tok, c) in &high {
            assert_eq!(counts[&tok], c);
            assert!(c >= 2);
        }
    }

    #[test]
    fn repetition_ratio_hand_cases() {
        assert_eq!(repetition_ratio(&[0, 1, 2, 3], 2), 0.0);
        let r = repetition_ratio(&[5, 5, 5, 5], 2);
        assert!((r - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(repetition_ratio(&[1, 2, 3], 4), 0.0);
        assert_eq!(repetition_ratio(&[], 4), 0.0);
    }

    #[test]
    fn repetition_ratio_zero_iff_all_distinct() {
        // (1,2) appears twice among the three bigrams.
        let r = repetition_ratio(&[1, 2, 1, 2], 2);
        assert!((r - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(repetition_ratio(&[4, 2, 9, 1], 2), 0.0);
    }

    #[test]
    fn clip_region_hand_cases() {
        let cfg = ObjectiveConfig::default();
        let r = clip_region(1.1, AdvantageSign::Positive, TokenClass::Knowledge, &cfg).unwrap();
        assert_eq!(r, ClipRegion::A);
        let r = clip_region(1.4, AdvantageSign::Positive, TokenClass::Reasoning, &cfg).unwrap();
        assert_eq!(r, ClipRegion::E);
        let r = clip_region(0.6, AdvantageSign::Negative, TokenClass::Reasoning, &cfg).unwrap();
        assert_eq!(r, ClipRegion::F);
        let mut dapo = ObjectiveConfig::default();
        dapo.algorithm = Algorithm::Dapo;
        assert!(clip_region(1.1, AdvantageSign::Positive, TokenClass::Knowledge, &dapo).is_err());
        assert!(clip_region(0.0, AdvantageSign::Positive, TokenClass::Knowledge, &cfg).is_err());
    }

    #[test]
    fn histogram_counts_sum_to_total() {
        let cfg = ObjectiveConfig::default();
        let mut hist = ClipRegionHistogram::default();
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let n = 500;
        for _ in 0..n {
            let r: f64 = rng.gen_range(0.01..2.5);
            let class = if rng.gen_bool(0.3) {
                TokenClass::Reasoning
            } else {
                TokenClass::Knowledge
            };
            let sign = if rng.gen_bool(0.5) {
                AdvantageSign::Positive
            } else {
                AdvantageSign::Negative
            };
            let region = clip_region(r, sign, class, &cfg).unwrap();
            // Knowledge tokens never land in the extensions.
            if class == TokenClass::Knowledge {
                assert!(region != ClipRegion::E && region != ClipRegion::F);
            }
            hist.record(region, class, sign);
        }
        assert_eq!(hist.total(), n);
    }

    #[test]
    fn avg_and_pass_at_k() {
        let flags = [true, false, false, true];
        assert_eq!(avg_at_k(&flags), 0.5);
        assert_eq!(pass_at_k(&flags), 1.0);
        let zeros = [false, false];
        assert_eq!(avg_at_k(&zeros), 0.0);
        assert_eq!(pass_at_k(&zeros), 0.0);
        assert!(pass_at_k(&flags) >= avg_at_k(&flags));
    }

    #[test]
    fn csv_emitters_have_stable_headers() {
        let mut buf = Vec::new();
        let recs = vec![record(0, 0, vec![1.0, 2.0])];
        let stats = entropy_stats(&recs, 0.8).unwrap();
        write_entropy_stats_csv(&mut buf, &[(0, stats)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("step,level,prompt_id,response_index,token_count,mean_entropy,batch_tau,frac_high_batch_tau,frac_high_response_tau\n"));

        let mut buf = Vec::new();
        write_regions_csv(&mut buf, &[(0, ClipRegionHistogram::default())]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("step,region,token_class,advantage_sign,count\n"));
        // 5 regions x 2 classes x 2 signs rows + header.
        assert_eq!(text.lines().count(), 21);

        let mut buf = Vec::new();
        write_frequency_csv(&mut buf, &[(3, 12)], Some(&['0', '1', '2', '+'])).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("1,3,+,12"));

        let mut buf = Vec::new();
        write_eval_csv(
            &mut buf,
            &[EvalRow {
                scope: "overall".into(),
                instances: 10,
                k: 4,
                avg_at_k: 0.25,
                pass_at_k: 0.5,
            }],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("overall,10,4,0.25,0.5"));
    }
}
