use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::ObservableRecord;

use super::config::{OutputFormat, ScenarioConfig};
use super::run::{Diagnostics, ScenarioRun};

pub const CSV_COLUMNS: [&str; 12] = [
    "t",
    "W",
    "rho_ee",
    "rho_gg",
    "re_rho_eg",
    "im_rho_eg",
    "H_x",
    "H_y",
    "H_z",
    "E_x",
    "E_y",
    "norm",
];

#[derive(Serialize)]
struct MetadataRef<'a> {
    config: &'a ScenarioConfig,
    diagnostics: &'a Diagnostics,
}

#[derive(Serialize)]
struct DocumentRef<'a> {
    metadata: MetadataRef<'a>,
    records: &'a [ObservableRecord],
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct Metadata {
    pub config: ScenarioConfig,
    pub diagnostics: Diagnostics,
}

/// Parsed JSON output.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct Document {
    pub metadata: Metadata,
    pub records: Vec<ObservableRecord>,
}

/// Header plus one row per record. Floats are written in shortest
/// round-trip form.
pub fn write_csv<W: Write>(records: &[ObservableRecord], out: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(run: &ScenarioRun, out: W) -> Result<()> {
    if run.records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let doc = DocumentRef {
        metadata: MetadataRef {
            config: &run.config,
            diagnostics: &run.diagnostics,
        },
        records: &run.records,
    };
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Write `run` to `path`. Nothing is created when there are no records.
pub fn emit(run: &ScenarioRun, format: OutputFormat, path: &Path) -> Result<()> {
    if run.records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        OutputFormat::Csv => write_csv(&run.records, &mut out)?,
        OutputFormat::Json => write_json(run, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ObservableRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(Error::Config(format!(
            "unexpected CSV header: {}",
            header.join(",")
        )));
    }
    Ok(r.deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()?)
}

pub fn read_json<R: Read>(input: R) -> Result<Document> {
    Ok(serde_json::from_reader(input)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{preset_with_overrides, run_scenario};

    fn small_run(samples: usize) -> ScenarioRun {
        let c = preset_with_overrides(
            "coherent_bare_sqrt_n_lown",
            &format!("[time]\nt_end = 3.0\nsamples = {samples}\n"),
        )
        .unwrap();
        run_scenario(&c).unwrap()
    }

    #[test]
    fn two_records_give_three_lines() {
        let run = small_run(2);
        let mut buf = Vec::new();
        write_csv(&run.records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.ends_with('\n'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert!(!text.contains(';'));
    }

    #[test]
    fn csv_round_trips_exactly() {
        let run = small_run(17);
        let mut buf = Vec::new();
        write_csv(&run.records, &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), run.records);
    }

    #[test]
    fn json_round_trips_field_for_field() {
        let mut run = small_run(9);
        run.diagnostics.oracle_max_deviation = Some(1.5e-12);
        let mut buf = Vec::new();
        write_json(&run, &mut buf).unwrap();
        let doc = read_json(buf.as_slice()).unwrap();
        assert_eq!(doc.records, run.records);
        assert_eq!(doc.metadata.config, run.config);
        assert_eq!(doc.metadata.diagnostics, run.diagnostics);
        let value: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        for key in CSV_COLUMNS {
            assert!(value["records"][0].get(key).is_some(), "{key}");
        }
        assert_eq!(value["metadata"]["config"]["field"]["tail_eps"], 1e-12);
    }

    #[test]
    fn empty_records_create_no_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let mut run = small_run(2);
        run.records.clear();
        assert!(matches!(
            emit(&run, OutputFormat::Csv, &path),
            Err(Error::EmptyRecords)
        ));
        assert!(!path.exists());
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("out.csv");
        assert!(matches!(
            emit(&small_run(2), OutputFormat::Csv, &path),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
