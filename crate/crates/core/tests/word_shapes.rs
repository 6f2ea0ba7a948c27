use vnner_core::features::{fregex, regex_flags, shape, shaped, token_type, Flag};

/// (token, fregex) with the full flag set spelled out.
const GOLDEN: &[(&str, &str)] = &[
    ("iPhone", "Mixed:ca,cl,cu,mix"),
    ("03-11-1984", "Other:cd,cs,d&-,da,hyp"),
    ("1234", "AllDigit:4d,ad,cd"),
    ("H.", "Other:acr,ca,cs,cu,iu,up"),
    ("Th.", "Other:acr,ca,cl,cs,cu,iu"),
    ("U.S.", "Other:acr,ca,cs,cu,iu,up"),
    ("A9", "Mixed:ca,cd,cu,d&a,ed,iu"),
    ("B52", "Mixed:ca,cd,cu,d&a,ed,iu"),
    ("New-York", "Other:ca,cl,cs,cu,hyp,iu"),
    ("03/10", "Other:cd,cs,d&/,da"),
    ("Buôn_Mê_Thuột", "InitUpper:ca,cl,cu,iu,na"),
    ("21B", "Mixed:ca,cd,co,cu,d&a"),
    ("2kg", "Mixed:ca,cd,cl,d&a,wei"),
    ("12", "AllDigit:2d,ad,cd"),
    ("12B", "Mixed:ca,cd,co,cu,d&a"),
    ("9-2", "Other:cd,cs,d&-,da,hyp"),
    ("9/2", "Other:cd,cs,d&/,da"),
    ("10,000", "Other:cd,cs,d&,"),
    ("10.000", "Other:cd,cs,d&."),
    ("M.", "Other:acr,ca,cs,cu,iu,up"),
    ("Việt_Nam", "InitUpper:ca,cl,cu,iu,na"),
    ("IBM", "AllUpper:au,ca,cu,iu"),
    ("học_sinh", "AllLower:al,ca,cl"),
    (";", "Punct:ao,cs"),
    ("s12456", "Mixed:ca,cd,cl,d&a,ed"),
    ("1A", "Mixed:ca,cd,co,cu,d&a"),
];

#[test]
fn golden_fregex() {
    for (token, want) in GOLDEN {
        assert_eq!(fregex(token), *want, "{token}");
    }
}

#[test]
fn every_flag_has_a_golden_example() {
    for flag in Flag::ALL {
        assert!(
            GOLDEN.iter().any(|(t, _)| regex_flags(t).contains(&flag)),
            "{} never fires",
            flag.name()
        );
    }
}

#[test]
fn flag_names_round_trip() {
    for flag in Flag::ALL {
        assert_eq!(Flag::from_name(flag.name()), Some(flag));
    }
}

#[test]
fn documented_shapes() {
    assert_eq!(shape("Đồng"), "ULLL");
    assert_eq!(shaped("Đồng"), "UL");
    assert_eq!(shape("A9-b"), "UD-L");
    assert_eq!(shaped("iPhone"), "LUL");
    assert_eq!(token_type("1234").as_str(), "AllDigit");
    assert_eq!(token_type("IBM").as_str(), "AllUpper");
    assert_eq!(token_type(";").as_str(), "Punct");
}

#[test]
fn negative_examples() {
    let has = |t: &str, f: &str| regex_flags(t).iter().any(|x| x.name() == f);
    assert!(!has("iPhone", "al"));
    assert!(!has("1234", "ca"));
    assert!(!has("123", "2d") && !has("123", "4d"));
    assert!(!has("học_sinh", "iu"));
    assert!(!has("Hà_nội", "na"));
    assert!(!has("32-13", "da"));
    assert!(!has("abc", "cd"));
    assert!(!has("2kgs", "wei"));
}
