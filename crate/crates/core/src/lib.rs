//! Transfer-based Korean/English translation engine built on feature-based
//! lexicalized tree adjoining grammars.
//!
//! The crate is `no_std` (with `alloc`) and holds the formalism itself:
//! flat feature-structure unification, elementary trees and their
//! instantiation, a CKY-style TAG chart parser, synchronous derivation-tree
//! transfer, and the recency-ordered topic list used to recover dropped
//! arguments. File formats, the CLI, and the bundled grammars live in the
//! companion `stag` crate.

#![no_std]

extern crate alloc;

pub mod compose;
pub mod derivation;
pub mod discourse;
pub mod feat;
pub mod grammar;
pub mod parse;
pub mod pipeline;
pub mod transfer;
pub mod tree;

pub use feat::{Bindings, FeatureStructure, FeatureValue};
pub use grammar::{AnchoredTree, Grammar, Language, LexEntry};
pub use tree::{ElementaryTree, NodeAddress, NodeMark, TreeKind, TreeNode};
