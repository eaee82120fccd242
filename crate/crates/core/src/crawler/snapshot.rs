use crate::archive::SnapshotRecord;
use crate::collection_spec::TemporalScope;

/// Picks the earliest capture inside the event interval, otherwise the one
/// closest to it (earlier wins ties). `None` only for an empty list.
pub fn select_snapshot<'a>(snapshots: &'a [SnapshotRecord], scope: &TemporalScope) -> Option<&'a SnapshotRecord> {
    snapshots
        .iter()
        .min_by_key(|s| (scope.distance_seconds(s.capture_time), s.capture_time))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archive::parse_timestamp14;
    use std::path::PathBuf;

    fn snap(ts: &str) -> SnapshotRecord {
        SnapshotRecord {
            canonical_url: "http://e.de/".into(),
            capture_time: parse_timestamp14(ts).unwrap(),
            warc_file: PathBuf::from("x.warc"),
            offset: 0,
            length: 1,
            http_status: 200,
            media_type: "text/html".into(),
        }
    }

    fn scope() -> TemporalScope {
        TemporalScope::new(
            parse_timestamp14("20100601000000").unwrap(),
            parse_timestamp14("20100630235959").unwrap(),
            0,
            0,
        )
    }

    #[test]
    fn earliest_inside() {
        let list = [snap("20100501000000"), snap("20100605000000"), snap("20100620000000")];
        assert_eq!(select_snapshot(&list, &scope()).unwrap(), &list[1]);
    }

    #[test]
    fn closest_outside() {
        let list = [snap("20100705235959"), snap("20100702235959")];
        assert_eq!(select_snapshot(&list, &scope()).unwrap(), &list[1]);
        // equidistant before and after: earlier wins
        let list = [snap("20100530000000"), snap("20100702235959")];
        assert_eq!(select_snapshot(&list, &scope()).unwrap(), &list[0]);
    }

    #[test]
    fn single_and_empty() {
        let list = [snap("19990101000000")];
        assert_eq!(select_snapshot(&list, &scope()).unwrap(), &list[0]);
        assert!(select_snapshot(&[], &scope()).is_none());
    }
}
