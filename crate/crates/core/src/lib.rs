//! Self-similar group actions, their Moore diagrams, and KMS states of the
//! associated Toeplitz algebras.

pub mod action;
pub mod algebra;
pub mod alphabet;
pub mod closure;
pub mod counting;
pub mod error;
pub mod kms;
pub mod linalg;
pub mod mealy;
pub mod moore;
mod partition;
pub mod sample;
pub mod zd;

pub use action::{
    act_restrict_word, act_word, portrait_fingerprint, product, restrict_word, Fingerprint,
    SelfSimilarAction,
};
pub use algebra::{apply_gauge, gauge_degree, Algebra, Combination, SpanningTerm};
pub use alphabet::{Alphabet, Letter, Word};
pub use closure::{
    canonical_form, exact_equal, is_trivial, restriction_closure, CanonicalForm, Caps,
    ClosureMachine, EqualityOptions,
};
pub use counting::{
    brute_force_counts, count_f, count_g, critical_limit_bounds, critical_value, critical_values,
    CriticalMethod, CriticalValues, TransferMatrix,
};
pub use error::{Error, Result};
pub use kms::{
    characterization_check, critical_value_state, cuntz_check, ground_check, ground_value,
    kms_check, psi_value, recursion_check, trace_property_check, CheckReport, Evaluator, Failure,
    Perturbed, State, StateKind, Trace,
};
pub use mealy::{
    builtin_basilica, builtin_grigorchuk, builtin_odometer, load_machine, MachineDocument,
    MealyAction, MealyElement, MealyMachine, Violation,
};
pub use moore::{
    build_diagram, cycle_reachable, dot_export, nucleus, stationary_subgraph, Certificate,
    DotOptions, Edge, MooreDiagram, NucleusResult, NucleusStatus,
};
pub use sample::Sampler;
pub use zd::{default_digits, DigitSet, IntMatrix, ZdAction, ZdElement};
