//! Edge-stream and assignment file formats.
//!
//! Stream files hold one edge per line as `src_id src_label dst_id dst_label`
//! separated by whitespace. Lines starting with `#` and blank lines are
//! skipped. Assignment files hold `vertex_id<TAB>partition` sorted by vertex.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::graph::{Edge, GraphError, LabelledGraph, PartitionId, Partitioning, VertexId};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Graph { line: usize, source: GraphError },
}

/// One edge line, kept verbatim so reordering tools can write it back
/// unchanged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamRecord {
    /// 1-based line number in the source file.
    pub line: usize,
    pub raw: String,
    pub edge: Edge,
}

pub fn parse_edge_line(line: usize, text: &str) -> Result<Option<Edge>, FormatError> {
    let trimmed = text.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let parse_err = |message: String| FormatError::Parse { line, message };
    let fields: Vec<&str> = trimmed.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(parse_err(format!("expected 4 fields, found {}", fields.len())));
    }
    let id = |s: &str| {
        s.parse::<VertexId>()
            .map_err(|e| parse_err(format!("bad vertex id {s:?}: {e}")))
    };
    let (u, v) = (id(fields[0])?, id(fields[2])?);
    Edge::new(u, fields[1], v, fields[3])
        .map(Some)
        .map_err(|source| FormatError::Graph { line, source })
}

pub fn read_stream(reader: impl Read) -> Result<Vec<StreamRecord>, FormatError> {
    let mut out = Vec::new();
    for (i, text) in BufReader::new(reader).lines().enumerate() {
        let text = text?;
        if let Some(edge) = parse_edge_line(i + 1, &text)? {
            out.push(StreamRecord {
                line: i + 1,
                raw: text,
                edge,
            });
        }
    }
    Ok(out)
}

pub fn read_stream_file(path: &Path) -> Result<Vec<StreamRecord>, FormatError> {
    read_stream(File::open(path)?)
}

pub fn write_stream<'a>(
    records: impl IntoIterator<Item = &'a StreamRecord>,
    writer: impl Write,
) -> io::Result<()> {
    let mut w = BufWriter::new(writer);
    for r in records {
        writeln!(w, "{}", r.raw)?;
    }
    w.flush()
}

/// Formats an edge as a stream line.
pub fn format_edge(e: &Edge) -> String {
    format!("{} {} {} {}", e.u(), e.label_u(), e.v(), e.label_v())
}

/// Builds the graph of a stream, collapsing repeated edges and reporting
/// label conflicts with the offending line.
pub fn graph_of(records: &[StreamRecord]) -> Result<LabelledGraph, FormatError> {
    let mut g = LabelledGraph::new();
    for r in records {
        g.add_edge(&r.edge)
            .map_err(|source| FormatError::Graph { line: r.line, source })?;
    }
    Ok(g)
}

pub fn write_assignment(partitioning: &Partitioning, writer: impl Write) -> io::Result<()> {
    let mut w = BufWriter::new(writer);
    for (v, p) in partitioning.sorted_assignment() {
        writeln!(w, "{v}\t{p}")?;
    }
    w.flush()
}

pub fn read_assignment(reader: impl Read, k: Option<usize>) -> Result<Partitioning, FormatError> {
    let mut rows: Vec<(VertexId, PartitionId, usize)> = Vec::new();
    for (i, text) in BufReader::new(reader).lines().enumerate() {
        let text = text?;
        let line = i + 1;
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| FormatError::Parse { line, message };
        let mut fields = trimmed.split('\t');
        let (Some(v), Some(p), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err("expected vertex<TAB>partition".into()));
        };
        let v: VertexId = v
            .trim()
            .parse()
            .map_err(|e| parse_err(format!("bad vertex id: {e}")))?;
        let p: PartitionId = p
            .trim()
            .parse()
            .map_err(|e| parse_err(format!("bad partition: {e}")))?;
        rows.push((v, p, line));
    }
    let k = k.unwrap_or_else(|| rows.iter().map(|r| r.1 + 1).max().unwrap_or(1));
    let mut out = Partitioning::new(k);
    for (v, p, line) in rows {
        out.assign(v, p)
            .map_err(|source| FormatError::Graph { line, source })?;
    }
    Ok(out)
}

pub fn read_assignment_file(path: &Path, k: Option<usize>) -> Result<Partitioning, FormatError> {
    read_assignment(File::open(path)?, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_round_trip_keeps_text() {
        let text = "# header\n1 a 2 b\n\n3  c\t2 b\n";
        let recs = read_stream(text.as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].line, 4);
        let mut out = Vec::new();
        write_stream(&recs, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1 a 2 b\n3  c\t2 b\n");
    }

    #[test]
    fn bad_lines_name_the_line() {
        let err = read_stream("1 a 2 b\n1 a 2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, FormatError::Parse { line: 2, .. }), "{err}");
        let err = read_stream("1 a 1 a\n".as_bytes()).unwrap_err();
        assert!(matches!(err, FormatError::Graph { line: 1, .. }));
        let err = read_stream("x a 2 b\n".as_bytes()).unwrap_err();
        assert!(err.to_string().starts_with("line 1"));
    }

    #[test]
    fn label_conflict_reported() {
        let recs = read_stream("1 a 2 b\n2 c 3 a\n".as_bytes()).unwrap();
        assert!(matches!(graph_of(&recs), Err(FormatError::Graph { line: 2, .. })));
    }

    #[test]
    fn assignment_round_trip() {
        let mut p = Partitioning::new(3);
        p.assign(10, 2).unwrap();
        p.assign(3, 0).unwrap();
        p.assign(7, 1).unwrap();
        let mut buf = Vec::new();
        write_assignment(&p, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "3\t0\n7\t1\n10\t2\n");
        let back = read_assignment(buf.as_slice(), Some(3)).unwrap();
        assert_eq!(back.sorted_assignment(), p.sorted_assignment());
        assert!(read_assignment("1\t0\n1\t1\n".as_bytes(), None).is_err());
        assert!(read_assignment("1\t5\n".as_bytes(), Some(2)).is_err());
    }
}
