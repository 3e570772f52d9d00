//! Desk-scale laboratory for reinforcement learning with verifiable rewards.
//!
//! The crate trains a tiny decoder-only transformer on synthetic tasks whose
//! answers can be checked exactly (arithmetic, sorting), using one of three
//! interchangeable policy-gradient objectives:
//!
//! * **GRPO**: group-relative advantages, symmetric ratio clipping, uniform
//!   KL regularization toward a frozen reference policy, sample-level loss
//!   aggregation.
//! * **DAPO**: asymmetric clip bounds (Clip-Higher), dynamic sampling of
//!   informative prompt groups, token-level loss aggregation, no KL term.
//! * **Archer**: entropy-aware dual-token constraints: each token is
//!   classified as reasoning (high entropy) or knowledge (low entropy) by a
//!   response-level entropy quantile, then given a class-specific clip range
//!   and KL weight, all tokens updated jointly.
//!
//! Supporting machinery: a small f64 tensor library with taped reverse-mode
//! differentiation ([`tensor`]), the transformer policy with sampling and
//! scoring ([`policy`]), synthetic verifiable-reward environments ([`envs`]),
//! group rollouts with dynamic sampling ([`rollout`]), the loss mathematics
//! ([`objective`]), the training loop ([`trainer`]), diagnostic measurements
//! ([`analytics`]), and a finite-difference gradient checker ([`gradcheck`]).

pub mod analytics;
pub mod envs;
pub mod gradcheck;
pub mod objective;
pub mod policy;
pub mod rng;
pub mod rollout;
pub mod tensor;
pub mod trainer;
