//! GraphML export of the validated projection.
//!
//! Nodes carry the attributes a network viewer needs to redraw the figure:
//! community id, GUO type, ATECO code and degree.

use std::collections::HashMap;
use std::io::Write;

use crate::communities::UndirectedGraph;
use crate::ranks::FirmRecord;

use super::PipelineError;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn write_graphml<W: Write>(
    g: &UndirectedGraph,
    assignment: &[usize],
    firms: &[FirmRecord],
    mut out: W,
) -> Result<(), PipelineError> {
    let meta: HashMap<&str, &FirmRecord> = firms
        .iter()
        .map(|f| (f.account_id.as_str(), f))
        .collect();

    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        out,
        r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#
    )?;
    writeln!(
        out,
        r#"  <key id="community" for="node" attr.name="community" attr.type="int"/>"#
    )?;
    writeln!(
        out,
        r#"  <key id="guo_type" for="node" attr.name="guo_type" attr.type="string"/>"#
    )?;
    writeln!(
        out,
        r#"  <key id="ateco" for="node" attr.name="ateco" attr.type="int"/>"#
    )?;
    writeln!(
        out,
        r#"  <key id="degree" for="node" attr.name="degree" attr.type="int"/>"#
    )?;
    writeln!(out, r#"  <graph id="validated" edgedefault="undirected">"#)?;
    for (idx, label) in g.labels().iter().enumerate() {
        writeln!(out, r#"    <node id="{}">"#, escape(label))?;
        writeln!(
            out,
            r#"      <data key="community">{}</data>"#,
            assignment[idx]
        )?;
        if let Some(firm) = meta.get(label.as_str()) {
            if let Some(guo) = firm.guo_type {
                writeln!(out, r#"      <data key="guo_type">{guo}</data>"#)?;
            }
            if let Some(ateco) = firm.ateco_code {
                writeln!(out, r#"      <data key="ateco">{ateco}</data>"#)?;
            }
        }
        writeln!(out, r#"      <data key="degree">{}</data>"#, g.degree(idx))?;
        writeln!(out, r#"    </node>"#)?;
    }
    let labels = g.labels();
    let mut written = std::collections::BTreeSet::new();
    for u in 0..g.n_nodes() {
        for &v in g.neighbors(u) {
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            if written.insert((a, b)) {
                writeln!(
                    out,
                    r#"    <edge source="{}" target="{}"/>"#,
                    escape(&labels[a]),
                    escape(&labels[b])
                )?;
            }
        }
    }
    writeln!(out, r#"  </graph>"#)?;
    writeln!(out, r#"</graphml>"#)?;
    Ok(())
}
