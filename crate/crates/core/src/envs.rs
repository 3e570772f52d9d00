//! Synthetic verifiable-reward tasks.
//!
//! Four task families over small symbol vocabularies: addition and
//! multiplication of decimal operands, and sorting/reversing digit lists.
//! Each instance renders as a character-per-token prompt ending in the
//! answer delimiter `=`, e.g. `27+58=`, and carries the unique canonical
//! answer. The verifier checks the text after the final delimiter against
//! the ground truth, with leading zeros stripped from both sides, so `085`
//! and `85` are equivalent.
//!
//! Rewards are binary by default (1 for a verified answer, 0 otherwise).
//! An optional overlong-shaping scheme subtracts a linear penalty from
//! truncated responses, growing from 0 at `soft_length` to `max_penalty`
//! at `hard_length`; it is off unless explicitly enabled.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("difficulty {difficulty} out of range [{lo}, {hi}] for {task:?}")]
    BadDifficulty {
        task: TaskKind,
        difficulty: u32,
        lo: u32,
        hi: u32,
    },
    #[error("unknown task kind: {0}")]
    UnknownTask(String),
    #[error("symbol {0:?} not in vocabulary")]
    UnknownSymbol(char),
    #[error("task set record {line}: {detail}")]
    BadRecord { line: usize, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EnvError>;

/// The four synthetic task families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Addition,
    Multiplication,
    Sort,
    Reverse,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [
        TaskKind::Addition,
        TaskKind::Multiplication,
        TaskKind::Sort,
        TaskKind::Reverse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Addition => "addition",
            TaskKind::Multiplication => "multiplication",
            TaskKind::Sort => "sort",
            TaskKind::Reverse => "reverse",
        }
    }

    /// Valid difficulty range: operand digit count for arithmetic,
    /// list length for sort/reverse.
    pub fn difficulty_range(self) -> (u32, u32) {
        match self {
            TaskKind::Addition => (1, 4),
            TaskKind::Multiplication => (1, 3),
            TaskKind::Sort | TaskKind::Reverse => (2, 8),
        }
    }

    /// Symbols this task needs beyond digits, delimiter, and stop.
    fn marker(self) -> Option<char> {
        match self {
            TaskKind::Addition => Some('+'),
            TaskKind::Multiplication => Some('*'),
            TaskKind::Sort => Some('s'),
            TaskKind::Reverse => Some('r'),
        }
    }
}

impl std::str::FromStr for TaskKind {
    type Err = EnvError;
    fn from_str(s: &str) -> Result<Self> {
        TaskKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| EnvError::UnknownTask(s.to_string()))
    }
}

/// Character-per-token vocabulary covering a set of task kinds. Symbol
/// order is canonical (digits, then task markers, then `=`, then `$`),
/// so the same task mix always yields the same token ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    symbols: Vec<char>,
}

impl Vocab {
    pub fn for_tasks(kinds: &[TaskKind]) -> Vocab {
        let mut symbols: Vec<char> = ('0'..='9').collect();
        for marker in ['+', '*', 's', 'r'] {
            if kinds.iter().any(|k| k.marker() == Some(marker)) {
                symbols.push(marker);
            }
        }
        symbols.push('=');
        symbols.push('$');
        Vocab { symbols }
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn stop_token(&self) -> u32 {
        (self.symbols.len() - 1) as u32
    }

    pub fn delimiter_token(&self) -> u32 {
        (self.symbols.len() - 2) as u32
    }

    pub fn encode(&self, text: &str) -> Result<Vec<u32>> {
        text.chars()
            .map(|c| {
                self.symbols
                    .iter()
                    .position(|&s| s == c)
                    .map(|i| i as u32)
                    .ok_or(EnvError::UnknownSymbol(c))
            })
            .collect()
    }

    pub fn decode(&self, tokens: &[u32]) -> String {
        tokens
            .iter()
            .map(|&t| self.symbols.get(t as usize).copied().unwrap_or('?'))
            .collect()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }
}

/// One generated problem: tokenized prompt plus its canonical answer.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TaskInstance {
    pub task_kind: TaskKind,
    pub difficulty: u32,
    pub seed: u64,
    /// Prompt rendered as text, e.g. `27+58=`; always ends with `=`.
    pub prompt_text: String,
    pub ground_truth: String,
    #[serde(skip)]
    pub prompt: Vec<u32>,
}

fn operand(rng: &mut ChaCha8Rng, digits: u32) -> u64 {
    if digits == 1 {
        rng.gen_range(0..10)
    } else {
        let lo = 10u64.pow(digits - 1);
        let hi = 10u64.pow(digits);
        rng.gen_range(lo..hi)
    }
}

/// Deterministically generate an instance from `(task_kind, difficulty, seed)`.
pub fn generate_instance(
    vocab: &Vocab,
    task_kind: TaskKind,
    difficulty: u32,
    seed: u64,
) -> Result<TaskInstance> {
    let (lo, hi) = task_kind.difficulty_range();
    if difficulty < lo || difficulty > hi {
        return Err(EnvError::BadDifficulty {
            task: task_kind,
            difficulty,
            lo,
            hi,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (prompt_text, ground_truth) = match task_kind {
        TaskKind::Addition => {
            let a = operand(&mut rng, difficulty);
            let b = operand(&mut rng, difficulty);
            (format!("{a}+{b}="), (a + b).to_string())
        }
        TaskKind::Multiplication => {
            let a = operand(&mut rng, difficulty);
            let b = operand(&mut rng, difficulty);
            (format!("{a}*{b}="), (a * b).to_string())
        }
        TaskKind::Sort => {
            let digits: Vec<u8> = (0..difficulty).map(|_| rng.gen_range(0..10)).collect();
            let mut sorted = digits.clone();
            sorted.sort_unstable();
            (
                format!("s{}=", digits_to_string(&digits)),
                digits_to_string(&sorted),
            )
        }
        TaskKind::Reverse => {
            let digits: Vec<u8> = (0..difficulty).map(|_| rng.gen_range(0..10)).collect();
            let reversed: Vec<u8> = digits.iter().rev().copied().collect();
            (
                format!("r{}=", digits_to_string(&digits)),
                digits_to_string(&reversed),
            )
        }
    };
    let prompt = vocab.encode(&prompt_text)?;
    Ok(TaskInstance {
        task_kind,
        difficulty,
        seed,
        prompt_text,
        ground_truth,
        prompt,
    })
}

fn digits_to_string(digits: &[u8]) -> String {
    digits.iter().map(|d| char::from(b'0' + d)).collect()
}

/// Canonical answer form: leading zeros stripped, but a bare zero survives.
fn canonicalize(s: &str) -> &str {
    let trimmed = s.trim_start_matches('0');
    if trimmed.is_empty() && !s.is_empty() {
        "0"
    } else {
        trimmed
    }
}

/// Exact-match verifier. Takes the text after the *final* delimiter in the
/// token sequence (prompt + response as one sequence), drops the stop
/// token, canonicalizes both sides, and compares. No delimiter, or nothing
/// after it, means false. Total: never errors.
pub fn is_equivalent(vocab: &Vocab, tokens: &[u32], ground_truth: &str) -> bool {
    let delim = vocab.delimiter_token();
    let stop = vocab.stop_token();
    let last_delim = match tokens.iter().rposition(|&t| t == delim) {
        Some(i) => i,
        None => return false,
    };
    let answer: String = tokens[last_delim + 1..]
        .iter()
        .take_while(|&&t| t != stop)
        .map(|&t| vocab.symbols.get(t as usize).copied().unwrap_or('?'))
        .collect();
    if answer.is_empty() {
        return false;
    }
    canonicalize(&answer) == canonicalize(ground_truth)
}

/// Optional overlong-response shaping.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ShapingConfig {
    pub enabled: bool,
    /// Response length at which the penalty starts.
    pub soft_length: usize,
    /// Response length at which the penalty saturates (the generation cap).
    pub hard_length: usize,
    /// Penalty at full overrun.
    pub max_penalty: f64,
}

impl Default for ShapingConfig {
    fn default() -> Self {
        ShapingConfig {
            enabled: false,
            soft_length: 4,
            hard_length: 8,
            max_penalty: 0.5,
        }
    }
}

/// Outcome of scoring one response.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RewardOutcome {
    pub reward: f64,
    pub correct: bool,
    pub truncated_penalty_applied: bool,
}

/// Score a response: 1 for a verified answer, 0 otherwise; minus the
/// shaping penalty when enabled and the response was truncated. The final
/// reward is clamped to [-1, 1].
pub fn reward(
    vocab: &Vocab,
    full_sequence: &[u32],
    response_len: usize,
    ground_truth: &str,
    truncated: bool,
    shaping: &ShapingConfig,
) -> RewardOutcome {
    let correct = is_equivalent(vocab, full_sequence, ground_truth);
    let base = if correct { 1.0 } else { 0.0 };
    let mut penalty = 0.0;
    let mut applied = false;
    if shaping.enabled && truncated {
        let span = shaping.hard_length.saturating_sub(shaping.soft_length);
        let frac = if span == 0 {
            1.0
        } else {
            let overrun = response_len.saturating_sub(shaping.soft_length);
            (overrun as f64 / span as f64).clamp(0.0, 1.0)
        };
        penalty = shaping.max_penalty * frac;
        applied = penalty > 0.0;
    }
    RewardOutcome {
        reward: (base - penalty).clamp(-1.0, 1.0),
        correct,
        truncated_penalty_applied: applied,
    }
}

// ---- task set export/import ------------------------------------------------

#[derive(serde::Serialize, serde::Deserialize)]
struct TaskRecord {
    task_kind: TaskKind,
    difficulty: u32,
    seed: u64,
    prompt_text: String,
    ground_truth: String,
}

/// Write instances as line-delimited JSON records.
pub fn export_task_set<W: Write>(w: &mut W, instances: &[TaskInstance]) -> Result<()> {
    for inst in instances {
        let rec = TaskRecord {
            task_kind: inst.task_kind,
            difficulty: inst.difficulty,
            seed: inst.seed,
            prompt_text: inst.prompt_text.clone(),
            ground_truth: inst.ground_truth.clone(),
        };
        let line = serde_json::to_string(&rec).expect("serializable record");
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Read a task set written by [`export_task_set`], re-tokenizing prompts
/// under `vocab` and re-deriving each instance to confirm it matches.
pub fn import_task_set<R: BufRead>(r: R, vocab: &Vocab) -> Result<Vec<TaskInstance>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TaskRecord = serde_json::from_str(&line).map_err(|e| EnvError::BadRecord {
            line: i + 1,
            detail: e.to_string(),
        })?;
        let inst = generate_instance(vocab, rec.task_kind, rec.difficulty, rec.seed)?;
        if inst.prompt_text != rec.prompt_text || inst.ground_truth != rec.ground_truth {
            return Err(EnvError::BadRecord {
                line: i + 1,
                detail: format!(
                    "stored prompt/answer {}/{} disagree with regenerated {}/{}",
                    rec.prompt_text, rec.ground_truth, inst.prompt_text, inst.ground_truth
                ),
            });
        }
        out.push(inst);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab_all() -> Vocab {
        Vocab::for_tasks(&TaskKind::ALL)
    }

    #[test]
    fn vocab_layout_is_canonical() {
        let v = Vocab::for_tasks(&[TaskKind::Addition]);
        assert_eq!(v.symbols(), &['0', '1', '2', '3', '4', '5', '6', '7', '8', '9', '+', '=', '$']);
        assert_eq!(v.size(), 13);
        assert_eq!(v.delimiter_token(), 11);
        assert_eq!(v.stop_token(), 12);
        let all = vocab_all();
        assert_eq!(all.size(), 16);
    }

    #[test]
    fn addition_instance_is_deterministic_and_correct() {
        let v = vocab_all();
        let a = generate_instance(&v, TaskKind::Addition, 2, 7).unwrap();
        let b = generate_instance(&v, TaskKind::Addition, 2, 7).unwrap();
        assert_eq!(a, b);
        let (x, rest) = a.prompt_text.split_once('+').unwrap();
        let y = rest.strip_suffix('=').unwrap();
        assert_eq!(x.len(), 2);
        assert_eq!(y.len(), 2);
        let sum: u64 = x.parse::<u64>().unwrap() + y.parse::<u64>().unwrap();
        assert_eq!(a.ground_truth, sum.to_string());
        assert_eq!(*a.prompt.last().unwrap(), v.delimiter_token());
    }

    #[test]
    fn sort_instance_matches_semantics() {
        let v = vocab_all();
        let inst = generate_instance(&v, TaskKind::Sort, 3, 1).unwrap();
        let body = inst
            .prompt_text
            .strip_prefix('s')
            .unwrap()
            .strip_suffix('=')
            .unwrap();
        assert_eq!(body.len(), 3);
        let mut chars: Vec<char> = body.chars().collect();
        chars.sort_unstable();
        let expect: String = chars.into_iter().collect();
        assert_eq!(inst.ground_truth, expect);
    }

    #[test]
    fn difficulty_bounds_enforced() {
        let v = vocab_all();
        assert!(matches!(
            generate_instance(&v, TaskKind::Addition, 5, 0),
            Err(EnvError::BadDifficulty { .. })
        ));
        assert!(matches!(
            generate_instance(&v, TaskKind::Sort, 1, 0),
            Err(EnvError::BadDifficulty { .. })
        ));
    }

    /// Independent re-evaluation of task semantics from the rendered prompt.
    fn oracle_answer(inst: &TaskInstance) -> String {
        let t = &inst.prompt_text;
        match inst.task_kind {
            TaskKind::Addition => {
                let (a, b) = t.strip_suffix('=').unwrap().split_once('+').unwrap();
                (a.parse::<u64>().unwrap() + b.parse::<u64>().unwrap()).to_string()
            }
            TaskKind::Multiplication => {
                let (a, b) = t.strip_suffix('=').unwrap().split_once('*').unwrap();
                (a.parse::<u64>().unwrap() * b.parse::<u64>().unwrap()).to_string()
            }
            TaskKind::Sort => {
                let body = t.strip_prefix('s').unwrap().strip_suffix('=').unwrap();
                let mut c: Vec<char> = body.chars().collect();
                c.sort_unstable();
                c.into_iter().collect()
            }
            TaskKind::Reverse => {
                let body = t.strip_prefix('r').unwrap().strip_suffix('=').unwrap();
                body.chars().rev().collect()
            }
        }
    }

    #[test]
    fn ground_truths_agree_with_semantic_oracle() {
        let v = vocab_all();
        for (i, kind) in TaskKind::ALL.iter().enumerate() {
            let (lo, hi) = kind.difficulty_range();
            for seed in 0..2500u64 {
                let difficulty = lo + (seed % (hi - lo + 1) as u64) as u32;
                let inst = generate_instance(&v, *kind, difficulty, seed * 4 + i as u64).unwrap();
                assert_eq!(inst.ground_truth, oracle_answer(&inst), "{inst:?}");
            }
        }
    }

    #[test]
    fn verifier_accepts_exact_and_zero_padded() {
        let v = vocab_all();
        let seq = v.encode("27+58=85$").unwrap();
        assert!(is_equivalent(&v, &seq, "85"));
        let padded = v.encode("27+58=085$").unwrap();
        assert!(is_equivalent(&v, &padded, "85"));
        let wrong = v.encode("27+58=86$").unwrap();
        assert!(!is_equivalent(&v, &wrong, "85"));
    }

    #[test]
    fn verifier_rejects_missing_delimiter_or_empty_answer() {
        let v = vocab_all();
        let no_delim = v.encode("2758$").unwrap();
        assert!(!is_equivalent(&v, &no_delim, "85"));
        let empty = v.encode("27+58=$").unwrap();
        assert!(!is_equivalent(&v, &empty, "85"));
    }

    #[test]
    fn verifier_uses_final_delimiter() {
        let v = vocab_all();
        let seq = v.encode("27+58=9=85$").unwrap();
        assert!(is_equivalent(&v, &seq, "85"));
    }

    #[test]
    fn verifier_is_total_on_arbitrary_tokens() {
        let v = vocab_all();
        assert!(!is_equivalent(&v, &[], "85"));
        assert!(!is_equivalent(&v, &[999, 1000], "85"));
    }

    #[test]
    fn rewards_binary_without_shaping() {
        let v = vocab_all();
        let off = ShapingConfig::default();
        let good = v.encode("27+58=85$").unwrap();
        let r = reward(&v, &good, 3, "85", false, &off);
        assert_eq!(r.reward, 1.0);
        assert!(r.correct);
        let bad = v.encode("27+58=12$").unwrap();
        let r = reward(&v, &bad, 3, "85", false, &off);
        assert_eq!(r.reward, 0.0);
        assert!(!r.correct);
        // Truncated but shaping off: reward untouched.
        let trunc = v.encode("27+58=85").unwrap();
        let r = reward(&v, &trunc, 2, "85", true, &off);
        assert_eq!(r.reward, 1.0);
        assert!(!r.truncated_penalty_applied);
    }

    #[test]
    fn shaping_penalty_is_linear_and_clamped() {
        let v = vocab_all();
        let shaping = ShapingConfig {
            enabled: true,
            soft_length: 4,
            hard_length: 8,
            max_penalty: 0.5,
        };
        let good = v.encode("27+58=85").unwrap();
        // Full overrun: len == hard_length.
        let r = reward(&v, &good, 8, "85", true, &shaping);
        assert!((r.reward - 0.5).abs() < 1e-12);
        assert!(r.truncated_penalty_applied);
        // Half overrun.
        let r = reward(&v, &good, 6, "85", true, &shaping);
        assert!((r.reward - 0.75).abs() < 1e-12);
        // Under the soft threshold: no penalty even though truncated.
        let r = reward(&v, &good, 3, "85", true, &shaping);
        assert_eq!(r.reward, 1.0);
        // Incorrect, full overrun: 0 - 0.5, within [-1, 1].
        let bad = v.encode("27+58=11").unwrap();
        let r = reward(&v, &bad, 8, "85", true, &shaping);
        assert!((r.reward + 0.5).abs() < 1e-12);
        assert!(r.reward >= -1.0 && r.reward <= 1.0);
    }

    #[test]
    fn task_set_roundtrip() {
        let v = vocab_all();
        let instances: Vec<TaskInstance> = (0..20)
            .map(|s| generate_instance(&v, TaskKind::Addition, 2, s).unwrap())
            .collect();
        let mut buf = Vec::new();
        export_task_set(&mut buf, &instances).unwrap();
        let loaded = import_task_set(buf.as_slice(), &v).unwrap();
        assert_eq!(instances, loaded);
    }

    #[test]
    fn task_set_import_rejects_tampered_answers() {
        let v = vocab_all();
        let inst = generate_instance(&v, TaskKind::Addition, 2, 3).unwrap();
        let mut buf = Vec::new();
        export_task_set(&mut buf, &[inst]).unwrap();
        let tampered = String::from_utf8(buf).unwrap().replace("ground_truth\":\"", "ground_truth\":\"9");
        assert!(import_task_set(tampered.as_bytes(), &v).is_err());
    }
}
