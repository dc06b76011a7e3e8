//! Text, LaTeX and JSON forms of expressions and certificates.

use std::collections::BTreeMap;

use mpdag_core::graph::{NodeSet, Pdag};
use mpdag_core::ident::{Certificate, DensityExpression, Factor};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Latex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderStyle {
    pub format: Format,
    pub dedupe: bool,
}

fn symbols(g: &Pdag, s: &NodeSet, latex: bool) -> Vec<String> {
    s.iter()
        .map(|v| {
            let l = g.label(v).to_lowercase();
            if !latex {
                return l;
            }
            let split = l.trim_end_matches(|c: char| c.is_ascii_digit()).len();
            if split == 0 || split == l.len() {
                l
            } else {
                format!("{}_{{{}}}", &l[..split], &l[split..])
            }
        })
        .collect()
}

fn factor(g: &Pdag, f: &Factor, latex: bool) -> String {
    let (sep, bar) = if latex { (", ", " \\mid ") } else { (",", "|") };
    let target = symbols(g, &f.target, latex).join(sep);
    let cond = symbols(g, &f.conditioning(), latex).join(sep);
    if cond.is_empty() {
        format!("f({target})")
    } else {
        format!("f({target}{bar}{cond})")
    }
}

/// Renders `e`, which should be in normal form.
pub fn render(g: &Pdag, e: &DensityExpression, format: Format) -> String {
    let latex = format == Format::Latex;
    match e {
        DensityExpression::Factor(f) => factor(g, f, latex),
        DensityExpression::Product(items) if items.is_empty() => "1".into(),
        DensityExpression::Product(items) => {
            let parts: Vec<String> = items
                .iter()
                .map(|i| match i {
                    DensityExpression::MarginalOver { .. } | DensityExpression::Fraction { .. } => {
                        let inner = render(g, i, format);
                        if latex {
                            format!("\\left[{inner}\\right]")
                        } else {
                            format!("[{inner}]")
                        }
                    }
                    _ => render(g, i, format),
                })
                .collect();
            parts.join(if latex { " \\, " } else { " " })
        }
        DensityExpression::MarginalOver { vars, body } => {
            let body = render(g, body, format);
            if latex {
                let d: Vec<String> =
                    symbols(g, vars, true).iter().map(|v| format!("\\mathrm{{d}}{v}")).collect();
                format!("\\int {body} \\, {}", d.join(" \\, "))
            } else {
                format!("INT_{{{}}} {body}", symbols(g, vars, false).join(","))
            }
        }
        DensityExpression::Fraction { numerator, denominator } => {
            let (n, d) = (render(g, numerator, format), render(g, denominator, format));
            if latex {
                format!("\\frac{{{n}}}{{{d}}}")
            } else {
                format!("({n}) / ({d})")
            }
        }
    }
}

/// Expressions with multiplicities, sorted by rendered string. Without
/// deduplication each expression keeps its own line in input order.
pub fn render_multiset(g: &Pdag, es: &[DensityExpression], style: RenderStyle) -> Vec<(String, usize)> {
    let rendered = es.iter().map(|e| render(g, e, style.format));
    if !style.dedupe {
        return rendered.map(|s| (s, 1)).collect();
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for s in rendered {
        *counts.entry(s).or_default() += 1;
    }
    counts.into_iter().collect()
}

pub fn labels(g: &Pdag, s: &NodeSet) -> Value {
    json!(g.set_labels(s))
}

pub fn expression_json(g: &Pdag, e: &DensityExpression) -> Value {
    match e {
        DensityExpression::Factor(f) => json!({
            "type": "factor",
            "target": labels(g, &f.target),
            "given": labels(g, &f.given),
            "fixed": labels(g, &f.fixed),
        }),
        DensityExpression::Product(items) => json!({
            "type": "product",
            "items": items.iter().map(|i| expression_json(g, i)).collect::<Vec<_>>(),
        }),
        DensityExpression::MarginalOver { vars, body } => json!({
            "type": "marginal",
            "vars": labels(g, vars),
            "body": expression_json(g, body),
        }),
        DensityExpression::Fraction { numerator, denominator } => json!({
            "type": "fraction",
            "numerator": expression_json(g, numerator),
            "denominator": expression_json(g, denominator),
        }),
    }
}

pub fn certificate_text(g: &Pdag, c: &Certificate) -> Vec<String> {
    let list = |s: &NodeSet| {
        let l = g.set_labels(s);
        if l.is_empty() {
            "{}".to_string()
        } else {
            l.join(",")
        }
    };
    vec![
        format!("treatment: {}", g.label(c.treatment)),
        format!("path: {}", c.path.render(g)),
        format!("intervened: {}", list(&c.intervened)),
        format!("conditioning: {}", list(&c.conditioning)),
        format!("open path: {}", c.connection.render(g)),
    ]
}

pub fn certificate_json(g: &Pdag, c: &Certificate) -> Value {
    let paths: Vec<Value> = c
        .connection
        .collider_paths
        .iter()
        .map(|p| json!(p.iter().map(|v| g.label(*v)).collect::<Vec<_>>()))
        .collect();
    json!({
        "treatment": g.label(c.treatment),
        "path": c.path.render(g),
        "intervened": labels(g, &c.intervened),
        "conditioning": labels(g, &c.conditioning),
        "open_path": c.connection.render(g),
        "collider_paths": paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mpdag_core::graph::Pdag;

    fn g() -> Pdag {
        Pdag::parse("X -> Y; V1 -> X; V2 -> Y; V1 -- V2").unwrap()
    }

    fn f(g: &Pdag, t: &str, given: &str, fixed: &str) -> DensityExpression {
        DensityExpression::Factor(Factor {
            target: g.parse_set(t).unwrap(),
            given: g.parse_set(given).unwrap(),
            fixed: g.parse_set(fixed).unwrap(),
        })
    }

    #[test]
    fn factors_sort_conditioning_by_node_order() {
        let g = g();
        assert_eq!(render(&g, &f(&g, "Y", "V2,V1", "X"), Format::Text), "f(y|x,v1,v2)");
        assert_eq!(render(&g, &f(&g, "V1", "", ""), Format::Text), "f(v1)");
        assert_eq!(
            render(&g, &f(&g, "Y", "V1", "X"), Format::Latex),
            "f(y \\mid x, v_{1})"
        );
    }

    #[test]
    fn empty_product_is_one() {
        assert_eq!(render(&g(), &DensityExpression::Product(vec![]), Format::Text), "1");
    }

    #[test]
    fn marginal_and_fraction() {
        let g = g();
        let num = DensityExpression::marginal(
            g.parse_set("V2").unwrap(),
            DensityExpression::product(vec![f(&g, "Y", "V1,V2", "X"), f(&g, "V2", "V1", "")]),
        );
        assert_eq!(render(&g, &num, Format::Text), "INT_{v2} f(y|x,v1,v2) f(v2|v1)");
        let frac = DensityExpression::fraction(num.clone(), f(&g, "V1", "", ""));
        assert_eq!(render(&g, &frac, Format::Text), "(INT_{v2} f(y|x,v1,v2) f(v2|v1)) / (f(v1))");
        assert_eq!(
            render(&g, &frac, Format::Latex),
            "\\frac{\\int f(y \\mid x, v_{1}, v_{2}) \\, f(v_{2} \\mid v_{1}) \\, \\mathrm{d}v_{2}}{f(v_{1})}"
        );
    }

    #[test]
    fn multiset_counts_and_sorts() {
        let g = g();
        let es = vec![f(&g, "Y", "X", ""), f(&g, "V1", "", ""), f(&g, "Y", "X", "")];
        let style = RenderStyle { format: Format::Text, dedupe: true };
        assert_eq!(
            render_multiset(&g, &es, style),
            vec![("f(v1)".to_string(), 1), ("f(y|x)".to_string(), 2)]
        );
        let raw = render_multiset(&g, &es, RenderStyle { dedupe: false, ..style });
        assert_eq!(raw.len(), 3);
    }
}
