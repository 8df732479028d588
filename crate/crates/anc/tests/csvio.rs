use anc::csvio::{
    read_events, read_player_stats, read_positions, read_rosters, write_events, write_player_stats,
};
use anc::AncError;
use anc_core::ingest::PlayEvent;
use anc_core::stats::{stat_index, Lineup, PlayerSeasonStats, NUM_STATS, STAT_NAMES};
use proptest::prelude::*;

const HEADER: &str = "game_id,elapsed_seconds,h1,h2,h3,h4,h5,a1,a2,a3,a4,a5,home_pts,away_pts\n";

fn stats_csv(fg3a: &str, fg3pct: &str, extra: Option<(&str, &str)>) -> String {
    let mut head = vec!["player".to_string(), "team".into(), "minutes".into()];
    head.extend(STAT_NAMES.iter().map(|s| s.to_string()));
    let mut row = vec!["Jaylen Brown Jr.".to_string(), "BOS".into(), "1200".into()];
    for s in STAT_NAMES {
        row.push(match s {
            "FG3A" => fg3a.into(),
            "FG3PCT" => fg3pct.into(),
            _ => "0.5".into(),
        });
    }
    if let Some((col, value)) = extra {
        let i = head.iter().position(|h| h == col).unwrap();
        row[i] = value.into();
    }
    format!("{}\n{}\n", head.join(","), row.join(","))
}

#[test]
fn short_row_names_its_line() {
    let text = format!("{HEADER}g1,0,a,b,c,d,e,f,g,h,i,j,0,0\ng1,12,a,b,c,d,f,g,h,i,j,2,0\n");
    match read_events(text.as_bytes()) {
        Err(AncError::Row { line, message }) => {
            assert_eq!(line, 3);
            assert!(message.contains("14"), "{message}");
        }
        other => panic!("expected a row error, got {other:?}"),
    }
}

#[test]
fn empty_player_cell_is_a_row_error() {
    let text = format!("{HEADER}g1,0,a,b,c,d,,f,g,h,i,j,0,0\n");
    let err = read_events(text.as_bytes()).unwrap_err();
    assert!(matches!(err, AncError::Row { line: 2, .. }), "{err}");
}

#[test]
fn duplicate_player_names_game_and_time() {
    let text = format!("{HEADER}g7,431.5,a,b,c,d,e,f,g,h,i,f,0,0\n");
    let err = read_events(text.as_bytes()).unwrap_err();
    let msg = err.to_string();
    assert!(matches!(
        err,
        AncError::DuplicatePlayer { side: "away", .. }
    ));
    assert!(
        msg.contains("g7") && msg.contains("431.5") && msg.contains('f'),
        "{msg}"
    );
}

#[test]
fn player_names_are_normalized_on_read() {
    let text = format!("{HEADER}g1,0,Marcus  Morris Sr.,b,c,d,e,f,g,h,i,j,0,0\n");
    let events = read_events(text.as_bytes()).unwrap();
    assert!(events[0]
        .home
        .players()
        .contains(&"marcus morris".to_string()));
}

#[test]
fn missing_stat_column_is_named() {
    let text = stats_csv("3", "0.4", None).replace(",BOXOUTS", "");
    match read_player_stats(text.as_bytes()) {
        Err(AncError::MissingColumn(c)) => assert_eq!(c, "BOXOUTS"),
        other => panic!("expected a missing column, got {other:?}"),
    }
}

#[test]
fn non_numeric_cell_names_row_and_column() {
    let text = stats_csv("3", "0.4", Some(("STL", "n/a")));
    match read_player_stats(text.as_bytes()) {
        Err(AncError::NotNumeric { row, column, value }) => {
            assert_eq!((row, column.as_str(), value.as_str()), (2, "STL", "n/a"));
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn zero_attempts_force_zero_percentage() {
    for pct in ["", "NaN", "0.37"] {
        let players = read_player_stats(stats_csv("0", pct, None).as_bytes()).unwrap();
        assert_eq!(players[0].get("FG3PCT").unwrap(), 0.0, "file value {pct:?}");
        assert_eq!(players[0].player_id, "jaylen brown");
    }
}

#[test]
fn rosters_and_positions() {
    let rosters =
        read_rosters("team,player\nBOS,Kyrie Irving\nBOS,Al Horford\nHOU,Chris Paul\n".as_bytes())
            .unwrap();
    assert_eq!(rosters["BOS"], vec!["kyrie irving", "al horford"]);
    assert_eq!(rosters["HOU"].len(), 1);
    let pos = read_positions("player,positions\nKyrie Irving,PG;SG\n".as_bytes()).unwrap();
    assert_eq!(pos["kyrie irving"].len(), 2);
}

fn arb_stats() -> impl Strategy<Value = PlayerSeasonStats> {
    (
        "[a-z]{1,8}( [a-z]{1,8})?",
        50.0f64..3000.0,
        proptest::collection::vec(0.0f64..40.0, NUM_STATS),
    )
        .prop_map(|(id, minutes, v)| {
            let mut stats = [0.0; NUM_STATS];
            stats.copy_from_slice(&v);
            for pct in ["FGPCT", "FG3PCT", "FTPCT"] {
                stats[stat_index(pct).unwrap()] /= 40.0;
            }
            PlayerSeasonStats {
                player_id: id,
                team: "t".into(),
                total_minutes: minutes,
                stats,
            }
        })
        .prop_filter("valid", |p| {
            p.validate().is_ok()
                && !["jr", "sr", "ii", "iii", "iv"]
                    .iter()
                    .any(|s| p.player_id.ends_with(&format!(" {s}")))
        })
}

proptest! {
    #[test]
    fn stats_round_trip_exactly(players in proptest::collection::vec(arb_stats(), 1..6)) {
        let mut buf = Vec::new();
        write_player_stats(&mut buf, &players).unwrap();
        let back = read_player_stats(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), players.len());
        for (a, b) in back.iter().zip(&players) {
            prop_assert_eq!(&a.player_id, &b.player_id);
            prop_assert_eq!(a.total_minutes, b.total_minutes);
            for s in 0..NUM_STATS {
                let zero_att = ["FGA", "FG3A", "FTA"].iter().any(|att| b.get(att).unwrap() == 0.0);
                if !zero_att {
                    prop_assert_eq!(a.stats[s], b.stats[s]);
                }
            }
        }
    }

    #[test]
    fn events_round_trip_exactly(t in 0.0f64..2880.0, hp in 0u32..4, ap in 0u32..4) {
        let e = PlayEvent {
            game_id: "g".into(),
            elapsed_seconds: t,
            home: Lineup::new(["a", "b", "c", "d", "e"]).unwrap(),
            away: Lineup::new(["f", "g", "h", "i", "j"]).unwrap(),
            home_points: hp,
            away_points: ap,
        };
        let mut buf = Vec::new();
        write_events(&mut buf, std::slice::from_ref(&e)).unwrap();
        prop_assert_eq!(read_events(buf.as_slice()).unwrap(), vec![e]);
    }
}
