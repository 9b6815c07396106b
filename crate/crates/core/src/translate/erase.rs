use crate::error::{Error, Result};
use crate::model::{PdsRule, Phase, Rule, Smpds};

/// The ordinary pushdown system a tool unaware of self-modification would
/// build from the rules of `phase`: rules outside `phase` are dropped and
/// every self-modifying rule becomes a step that leaves the stack alone.
/// The result has a single phase `init` holding all of its rules, and keeps
/// the configurations that were in `phase`.
pub fn erase_self_modification(smpds: &Smpds, phase: Phase) -> Result<Smpds> {
    let mut out = Smpds::new();
    for p in smpds.states() {
        out.state(smpds.state_name(p));
    }
    for g in smpds.symbols() {
        out.symbol(smpds.symbol_name(g));
    }
    for (id, rule) in smpds.rules() {
        if !phase.contains(id) {
            continue;
        }
        let name = smpds.rule_name(id);
        match rule {
            Rule::Pds(r) => {
                out.add_rule(name, Rule::Pds(r.clone()))?;
            }
            Rule::SelfMod(r) => {
                for g in smpds.symbols() {
                    let fresh = out.fresh_rule_name(&format!("{name}.{}", smpds.symbol_name(g)));
                    out.add_rule(
                        &fresh,
                        Rule::Pds(PdsRule {
                            from: r.from,
                            symbol: g,
                            to: r.to,
                            word: vec![g],
                        }),
                    )?;
                }
            }
        }
    }
    let all = out.all_rules_phase();
    out.define_phase("init", all)
        .map_err(|e| Error::Invalid(e.to_string()))?;
    for c in smpds.configs().iter().filter(|c| c.phase == phase) {
        let mut c = c.clone();
        c.phase = all;
        out.add_config(c);
    }
    Ok(out)
}
