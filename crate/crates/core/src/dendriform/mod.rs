//! Dendriform structure on decorated trees.

pub mod expr;
pub mod parenthesis;
pub mod polynomial;
pub mod products;

pub use expr::parse_dendriform_expr;
pub use parenthesis::{delta_to_tree, parse_parenthesis_word, parse_parenthesis_word_in, ParenthesisWord, Token};
pub use polynomial::{
    parse_rational, rational, rational_to_f64, CoeffMul, Coefficient, MatrixPolynomial, Rational, RationalPolynomial,
    TreePolynomial,
};
pub use products::{
    char_trees, left_pre_lie, pre_lie, prec, segner_decomposition, shuffle, succ, PreLieOrientation, Products,
    ShuffleCache, TreeCounts,
};
