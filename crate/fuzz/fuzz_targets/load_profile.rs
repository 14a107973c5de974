//! Arbitrary bytes must never panic the profile decoder, and any profile
//! it accepts must round-trip through its own serializer unchanged.

#![no_main]

use chronolog::calibrate::PlatformProfile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(profile) = PlatformProfile::from_toml(src) {
        let text = profile.to_toml();
        let again = PlatformProfile::from_toml(&text).expect("reload own output");
        assert_eq!(profile, again);
    }
});
