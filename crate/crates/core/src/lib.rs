pub mod corpus;
pub mod evidence;
pub mod js;
pub mod sandbox;
pub mod static_analysis;
pub mod prompt;
pub mod pipeline;
pub mod llm;
pub mod risk;
pub mod eval;
