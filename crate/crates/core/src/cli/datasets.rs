//! Public benchmark datasets: download, normalise to `timestamp,value[,..]`
//! CSV, and pin checksums on first fetch.

use std::collections::BTreeMap;
use std::io::{Cursor, Read};
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct Dataset {
    pub name: &'static str,
    pub url: &'static str,
    pub description: &'static str,
    normalise: fn(&[u8]) -> Result<String>,
}

pub const DATASETS: [Dataset; 3] = [
    Dataset {
        name: "us-unemployment",
        url: "https://fred.stlouisfed.org/graph/fredgraph.csv?id=UNRATE",
        description: "monthly US civilian unemployment rate (BLS series via FRED)",
        normalise: normalise_fred,
    },
    Dataset {
        name: "bike-sharing",
        url: "https://archive.ics.uci.edu/static/public/275/bike+sharing+dataset.zip",
        description: "daily Capital Bikeshare rental counts with weather regressors (UCI)",
        normalise: normalise_uci_bike,
    },
    Dataset {
        name: "peyton-manning",
        url: "https://raw.githubusercontent.com/facebook/prophet/main/examples/example_wp_log_peyton_manning.csv",
        description: "daily log page views of a Wikipedia article",
        normalise: normalise_prophet,
    },
];

pub fn dataset(name: &str) -> Result<&'static Dataset> {
    DATASETS.iter().find(|d| d.name == name).ok_or_else(|| {
        let known: Vec<&str> = DATASETS.iter().map(|d| d.name).collect();
        Error::Dataset(format!(
            "unknown dataset `{name}` (known: {})",
            known.join(", ")
        ))
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

const CHECKSUM_FILE: &str = "checksums.json";

fn read_checksums(dir: &Path) -> Result<BTreeMap<String, String>> {
    let path = dir.join(CHECKSUM_FILE);
    if !path.exists() {
        return Ok(BTreeMap::new());
    }
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Verify `bytes` against the checksum pinned for `name` in `dir`, pinning
/// it if none is recorded yet. Returns the digest.
pub fn verify_or_pin(dir: &Path, name: &str, bytes: &[u8]) -> Result<String> {
    let digest = sha256_hex(bytes);
    let mut sums = read_checksums(dir)?;
    match sums.get(name) {
        Some(pinned) if *pinned != digest => {
            return Err(Error::Dataset(format!(
                "checksum mismatch for `{name}`: pinned {pinned}, downloaded {digest}"
            )))
        }
        Some(_) => {}
        None => {
            sums.insert(name.to_string(), digest.clone());
            std::fs::create_dir_all(dir)?;
            std::fs::write(
                dir.join(CHECKSUM_FILE),
                serde_json::to_string_pretty(&sums)? + "\n",
            )?;
        }
    }
    Ok(digest)
}

/// Normalise already-downloaded bytes and write `<dir>/<name>.csv`.
pub fn install(dir: &Path, ds: &Dataset, raw: &[u8]) -> Result<PathBuf> {
    let csv = (ds.normalise)(raw)?;
    verify_or_pin(dir, ds.name, raw)?;
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.csv", ds.name));
    std::fs::write(&path, csv)?;
    Ok(path)
}

/// Download `name` into `dir`.
pub fn fetch(name: &str, dir: &Path) -> Result<PathBuf> {
    let ds = dataset(name)?;
    let raw = ureq::get(ds.url)
        .call()
        .and_then(|mut r| r.body_mut().with_config().limit(64 << 20).read_to_vec())
        .map_err(|e| Error::Dataset(format!("download of {} failed: {e}", ds.url)))?;
    install(dir, ds, &raw)
}

fn text(raw: &[u8]) -> Result<&str> {
    std::str::from_utf8(raw).map_err(|e| Error::Dataset(format!("not UTF-8: {e}")))
}

fn records(raw: &[u8]) -> Result<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let mut rdr = csv::Reader::from_reader(text(raw)?.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| Error::Dataset(e.to_string()))?
        .clone();
    let rows = rdr
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Dataset(e.to_string()))?;
    Ok((header, rows))
}

fn column(header: &csv::StringRecord, name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Dataset(format!("missing column `{name}`")))
}

/// FRED `fredgraph.csv`: date column then the series; `.` marks missing.
pub fn normalise_fred(raw: &[u8]) -> Result<String> {
    let (header, rows) = records(raw)?;
    if header.len() < 2 {
        return Err(Error::Dataset("expected a date and a value column".into()));
    }
    let mut out = String::from("timestamp,value\n");
    for r in rows {
        let v = r.get(1).unwrap_or("").trim();
        let v = if v == "." { "" } else { v };
        out.push_str(&format!("{},{v}\n", r.get(0).unwrap_or("").trim()));
    }
    Ok(out)
}

/// UCI archive: `day.csv` with rental count and weather columns.
pub fn normalise_uci_bike(raw: &[u8]) -> Result<String> {
    let mut archive =
        zip::ZipArchive::new(Cursor::new(raw)).map_err(|e| Error::Dataset(e.to_string()))?;
    let mut day = Vec::new();
    archive
        .by_name("day.csv")
        .map_err(|e| Error::Dataset(e.to_string()))?
        .read_to_end(&mut day)?;
    normalise_bike_day(&day)
}

pub fn normalise_bike_day(raw: &[u8]) -> Result<String> {
    let (header, rows) = records(raw)?;
    let cols = ["dteday", "cnt", "weathersit", "temp", "hum", "windspeed"]
        .iter()
        .map(|c| column(&header, c))
        .collect::<Result<Vec<_>>>()?;
    let mut out = String::from("timestamp,value,weather,temperature,humidity,windspeed\n");
    for r in rows {
        let fields: Vec<&str> = cols
            .iter()
            .map(|&c| r.get(c).unwrap_or("").trim())
            .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Prophet example CSV (`ds,y`). Absent days become empty rows so the
/// series stays on a daily grid.
pub fn normalise_prophet(raw: &[u8]) -> Result<String> {
    let (header, rows) = records(raw)?;
    let (ds, y) = (column(&header, "ds")?, column(&header, "y")?);
    let mut out = String::from("timestamp,value\n");
    let mut prev: Option<NaiveDate> = None;
    for r in rows {
        let raw_date = r.get(ds).unwrap_or("").trim();
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d")
            .map_err(|_| Error::Dataset(format!("bad date `{raw_date}`")))?;
        if let Some(p) = prev {
            if date <= p {
                return Err(Error::Dataset(format!("dates not increasing at {date}")));
            }
            let mut d = p + Duration::days(1);
            while d < date {
                out.push_str(&format!("{d},\n"));
                d += Duration::days(1);
            }
        }
        out.push_str(&format!("{date},{}\n", r.get(y).unwrap_or("").trim()));
        prev = Some(date);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;
    use crate::series::{read_csv_from, MissingPolicy, Periodicity};

    #[test]
    fn fred_rows() {
        let out =
            normalise_fred(b"observation_date,UNRATE\n1948-01-01,3.4\n1948-02-01,.\n").unwrap();
        assert_eq!(out, "timestamp,value\n1948-01-01,3.4\n1948-02-01,\n");
    }

    #[test]
    fn prophet_gaps_filled() {
        let out = normalise_prophet(b"ds,y\n2008-01-01,9.5\n2008-01-04,8.0\n").unwrap();
        assert_eq!(
            out,
            "timestamp,value\n2008-01-01,9.5\n2008-01-02,\n2008-01-03,\n2008-01-04,8.0\n"
        );
        let s = read_csv_from(out.as_bytes(), None, MissingPolicy::ForwardFill).unwrap();
        assert_eq!(s.periodicity(), Periodicity::Daily);
        assert_eq!(s.values(), &[9.5, 9.5, 9.5, 8.0]);
    }

    #[test]
    fn uci_zip() {
        let day = "instant,dteday,season,yr,mnth,holiday,weekday,workingday,weathersit,temp,atemp,hum,windspeed,casual,registered,cnt\n\
                   1,2011-01-01,1,0,1,0,6,0,2,0.344167,0.363625,0.805833,0.160446,331,654,985\n";
        let mut buf = Cursor::new(Vec::new());
        {
            let mut w = zip::ZipWriter::new(&mut buf);
            w.start_file("day.csv", zip::write::SimpleFileOptions::default())
                .unwrap();
            w.write_all(day.as_bytes()).unwrap();
            w.finish().unwrap();
        }
        let out = normalise_uci_bike(buf.get_ref()).unwrap();
        assert_eq!(
            out,
            "timestamp,value,weather,temperature,humidity,windspeed\n2011-01-01,985,2,0.344167,0.805833,0.160446\n"
        );
    }

    #[test]
    fn checksum_pinned_then_enforced() {
        let dir = tempfile::tempdir().unwrap();
        let ds = dataset("us-unemployment").unwrap();
        let raw = b"DATE,UNRATE\n2000-01-01,4.0\n";
        let p = install(dir.path(), ds, raw).unwrap();
        assert!(std::fs::read_to_string(p)
            .unwrap()
            .ends_with("2000-01-01,4.0\n"));
        install(dir.path(), ds, raw).unwrap();
        let err = install(dir.path(), ds, b"DATE,UNRATE\n2000-01-01,4.1\n").unwrap_err();
        assert!(
            matches!(err, Error::Dataset(ref m) if m.contains("checksum")),
            "{err}"
        );
        assert!(dataset("nope").is_err());
    }
}
