use std::fmt;

use super::{Rule, RuleId, Smpds};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    DanglingRuleId,
    UndeclaredState,
    UndeclaredSymbol,
    /// `r = p --(r, r2)--> p'` with `r2 != r`; pre*/post* need
    /// `normalize_selfmod` first.
    SelfReference,
    /// Right-hand side longer than two symbols; post* needs
    /// `normalize_push` first.
    NeedsNormalizePush,
    DanglingPhaseMember,
    MalformedConfig,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub rule: Option<RuleId>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}", self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.diagnostics.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Warning)
    }

    pub fn count(&self, kind: DiagnosticKind) -> usize {
        self.diagnostics.iter().filter(|d| d.kind == kind).count()
    }

    fn push(
        &mut self,
        severity: Severity,
        kind: DiagnosticKind,
        rule: Option<RuleId>,
        message: String,
    ) {
        self.diagnostics.push(Diagnostic {
            severity,
            kind,
            rule,
            message,
        });
    }
}

impl Smpds {
    /// Lists every invariant violation; the report is empty iff the system
    /// is ready for both saturation procedures as is.
    pub fn validate(&self) -> ValidationReport {
        use DiagnosticKind::*;
        use Severity::*;

        let mut report = ValidationReport::default();
        let n_states = self.num_states();
        let n_symbols = self.num_symbols();
        let n_rules = self.num_rules();
        let label = |id: RuleId| self.rule_name(id).to_owned();

        for (id, rule) in self.rules() {
            let from = rule.from_state();
            if from.index() >= n_states {
                report.push(
                    Error,
                    UndeclaredState,
                    Some(id),
                    format!("rule {}: undeclared state", label(id)),
                );
            }
            match rule {
                Rule::Pds(r) => {
                    if r.to.index() >= n_states {
                        report.push(
                            Error,
                            UndeclaredState,
                            Some(id),
                            format!("rule {}: undeclared state", label(id)),
                        );
                    }
                    if std::iter::once(&r.symbol)
                        .chain(&r.word)
                        .any(|s| s.index() >= n_symbols)
                    {
                        report.push(
                            Error,
                            UndeclaredSymbol,
                            Some(id),
                            format!("rule {}: symbol not in the stack alphabet", label(id)),
                        );
                    }
                    if r.word.len() > 2 {
                        report.push(
                            Warning,
                            NeedsNormalizePush,
                            Some(id),
                            format!(
                                "rule {} pushes {} symbols; needs normalize_push",
                                label(id),
                                r.word.len()
                            ),
                        );
                    }
                }
                Rule::SelfMod(r) => {
                    if r.to.index() >= n_states {
                        report.push(
                            Error,
                            UndeclaredState,
                            Some(id),
                            format!("rule {}: undeclared state", label(id)),
                        );
                    }
                    for target in [r.removed, r.added] {
                        if target.index() >= n_rules {
                            report.push(
                                Error,
                                DanglingRuleId,
                                Some(id),
                                format!("rule {}: dangling RuleId {}", label(id), target.0),
                            );
                        }
                    }
                    if r.removed == id && r.added != id {
                        report.push(
                            Warning,
                            SelfReference,
                            Some(id),
                            format!("rule {} removes itself; needs normalize_selfmod", label(id)),
                        );
                    }
                }
            }
        }

        for (name, phase) in self.named_phases() {
            if phase.set().bound() as usize > n_rules {
                report.push(
                    Error,
                    DanglingPhaseMember,
                    None,
                    format!("phase {name} mentions an undeclared rule"),
                );
            }
        }
        for c in self.configs() {
            if let Err(e) = self.check_config(c) {
                report.push(Error, MalformedConfig, None, e.to_string());
            }
        }
        report
    }
}
