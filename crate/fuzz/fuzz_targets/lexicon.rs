#![no_main]

use libfuzzer_sys::fuzz_target;
use udstab::repattern::TriggerLexicon;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(lex) = TriggerLexicon::from_tsv(text) {
        let tsv = lex.to_tsv();
        let back = TriggerLexicon::from_tsv(&tsv).expect("written lexicon reads back");
        assert_eq!(back.to_tsv(), tsv);
    }
});
