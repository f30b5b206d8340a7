//! Bounds for small discrete primitive relay channels: the auxiliary-variable
//! upper bound, compress-forward, cut-set, genericity, a quantized oracle and
//! conditional graph entropy.

mod bounds;
mod channel;
mod graph;
mod oracle;
mod polish;

pub use bounds::{
    aux_alphabet, cf_and_prop4, cf_bound, cf_rate, cutset_primitive, is_generic, prop4_bound,
    prop4_terms, AuxSolution, Genericity, Prop4Terms, FEASIBILITY_TOL, RANK_TOL,
};
pub use channel::{PrimitiveChannel, FILE_SUM_TOL, MAX_ALPHABET};
pub(crate) use channel::{check_c0, check_pmf};
pub use graph::{
    characteristic_graph, conditional_graph_entropy, conditional_graph_entropy_joint,
    maximal_independent_sets,
};
pub use oracle::{
    brute_force_oracle, brute_force_oracle_with_cap, OracleSolution, ORACLE_EVALUATION_CAP,
    ORACLE_MAX_CELLS,
};
