//! Text syntax: parser, pretty-printer, and desugaring of name-passing sugar.
//!
//! Source files use extension `.ho`, UTF-8, with `--` line comments.

mod desugar;
mod lexer;
mod parser;
mod printer;

pub use desugar::{desugar_name_passing, desugar_np_type};
pub use parser::{parse, parse_proc, parse_sess_type, ParseError, SourceFile};
pub use printer::{print_chan_type, print_proc, print_sess_type, print_val_type, print_value};
