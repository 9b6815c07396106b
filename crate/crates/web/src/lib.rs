//! Browser bindings: step through a system, saturate, and query membership.
//!
//! The `ops` functions hold the logic and return plain `String` errors so
//! they can be exercised natively; the exported wrappers convert them.

use wasm_bindgen::prelude::*;

pub mod ops {
    use smpds::asm::{compile, parse_program, CompileOptions};
    use smpds::automaton::{self, PAutomaton};
    use smpds::model::text;
    use smpds::{poststar, prestar, Configuration, Smpds};

    fn model(src: &str) -> Result<Smpds, String> {
        text::parse(src).map_err(|e| format!("model: {e}"))
    }

    fn configs(m: &Smpds, lines: &str) -> Result<Vec<Configuration>, String> {
        let cs: Vec<_> = lines
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| m.parse_config(l).map_err(|e| format!("`{l}`: {e}")))
            .collect::<Result<_, _>>()?;
        if cs.is_empty() {
            Ok(m.configs().to_vec())
        } else {
            Ok(cs)
        }
    }

    /// Successors of one configuration, one per line.
    pub fn successors(src: &str, config: &str) -> Result<String, String> {
        let m = model(src)?;
        let c = m.parse_config(config).map_err(|e| e.to_string())?;
        let next = m.step(&c).map_err(|e| e.to_string())?;
        Ok(next
            .iter()
            .map(|c| text::config_body(&m, c) + "\n")
            .collect())
    }

    /// `direction` is `pre` or `post`; `starts` lists configurations, one per
    /// line (the model's own when empty). Returns the automaton and its DOT
    /// rendering.
    pub fn saturate(src: &str, direction: &str, starts: &str) -> Result<(String, String), String> {
        let m = model(src)?;
        let cs = configs(&m, starts)?;
        let aut = PAutomaton::from_configs(&cs);
        let out = match direction {
            "pre" => prestar::prestar(&m, &aut),
            "post" => poststar::poststar(&m, &aut),
            other => return Err(format!("unknown direction `{other}`")),
        }
        .map_err(|e| e.to_string())?;
        Ok((
            automaton::text::print(&m, &out),
            automaton::to_dot(&m, &out),
        ))
    }

    pub fn check(src: &str, aut: &str, config: &str) -> Result<bool, String> {
        let m = model(src)?;
        let a = automaton::text::parse(&m, aut).map_err(|e| format!("automaton: {e}"))?;
        let c = m.parse_config(config).map_err(|e| e.to_string())?;
        Ok(a.accepts(&c))
    }

    pub fn compile_asm(program: &str) -> Result<String, String> {
        let p = parse_program(program).map_err(|e| e.to_string())?;
        let c = compile(&p, CompileOptions::default()).map_err(|e| e.to_string())?;
        Ok(text::print(&c.smpds))
    }
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen]
pub fn example_model() -> String {
    smpds::fixtures::EXAMPLE_ONE.to_owned()
}

#[wasm_bindgen]
pub fn successors(model: &str, config: &str) -> Result<String, JsError> {
    ops::successors(model, config).map_err(js)
}

#[wasm_bindgen]
pub fn saturate(model: &str, direction: &str, starts: &str) -> Result<String, JsError> {
    ops::saturate(model, direction, starts)
        .map(|r| r.0)
        .map_err(js)
}

#[wasm_bindgen]
pub fn saturate_dot(model: &str, direction: &str, starts: &str) -> Result<String, JsError> {
    ops::saturate(model, direction, starts)
        .map(|r| r.1)
        .map_err(js)
}

#[wasm_bindgen]
pub fn check(model: &str, automaton: &str, config: &str) -> Result<bool, JsError> {
    ops::check(model, automaton, config).map_err(js)
}

#[wasm_bindgen]
pub fn compile_asm(program: &str) -> Result<String, JsError> {
    ops::compile_asm(program).map_err(js)
}
