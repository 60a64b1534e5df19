//! Password-hiding vectors from `oracle/gen_vectors.py`.

/// (plaintext, secret, request authenticator, hidden), all hex.
pub const HIDE_VECTORS: &[(&str, &str, &str, &str)] = &[
    ("68656c6c6f", "736563726574", "000102030405060708090a0b0c0d0e0f", "3e6ba528ff92d367ca5efb706cd4e707"),
    ("61", "73", "00000000000000000000000000000000", "0b002ddb93fcbc0dd3ebd09300970fc8"),
    ("30313233343536373839616263646566", "74657374696e67313233", "000102030405060708090a0b0c0d0e0f", "a6df3bf940c84c2d287f66466370e7ed"),
    ("3031323334353637383961626364656667", "74657374696e67313233", "000102030405060708090a0b0c0d0e0f", "a6df3bf940c84c2d287f66466370e7ed65a814dea05f4f990007505920bd8742"),
    ("636f727265637420686f727365206261747465727920737461706c65", "74657374696e67313233", "101112131415161718191a1b1c1d1e1f", "d9e1ae356b8710db12f828c9dce9c7d78fc2920db5e7c914aa15f93fbf58dd06"),
    ("7070707070707070707070707070707070707070707070707070707070707070", "6b", "ffffffffffffffffffffffffffffffff", "5a75ea58f0fcce765c70f85eae50271ec0d85109dc24cf508cc4a7f1ec5c1a41"),
    ("6d756c74692d626c6f636b2070617373776f7264207370616e6e696e6720746872656520626c6f636b7321", "736861726564736563726574", "a0a1a2a3a4a5a6a7a8a9aaabacadaeaf", "602f76d87681d9624bd4925f3319e9468f4826d171780bf3e5857942a361764b0aad40e4f65030eb6844ab1cb3f5fef8"),
    ("0102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f202122232425262728292a2b2c2d2e2f303132333435363738393a3b3c3d3e3f404142434445464748494a4b4c4d4e4f505152535455565758595a5b5c5d5e5f606162636465666768696a6b6c6d6e6f707172737475767778797a7b7c7d7e7f80", "78787878787878787878787878787878787878787878787878787878787878787878787878787878", "303132333435363738393a3b3c3d3e3f", "d3966e20e746b1235b9236e3807c2939a0bf550210b9d1fead5ae56b3e6e2d3a3fce7dcf54c12ce0a0592e517b53377b4ed37971d3e070abf148c5bddae54ea0fa1c9990cb7122071c9fd76e3a5ec01ff8e56cc3d29f0764b64a7ee82d9ce8d2f29d4ed02737343a6a454184309e0546b15b35b526853cfe296d70051bb002dc"),
    ("313233343536", "74657374696e67313233", "5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a", "b5c4fd6f08a4b7d014e2a23948fdbaca"),
    ("fffefd", "0001", "000102030405060708090a0b0c0d0e0f", "6769bacc0f6cc5e5b40537e892336f44"),
    ("5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a5a7a", "6c6f6e67657220736861726564207365637265742076616c7565", "6465666768696a6b6c6d6e6f70717273", "3e5270acd33f4618d335ba6d31a4b0404730611aa41af3e69a0032976e5dea89ad7cedb16b4815cce872d8646a6b91f5aa539457b2cd9622d25ddbdc0669f007c844916327673ffbc965b54e5b9822ca"),
    ("71717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171717171", "733363723374", "c8c9cacbcccdcecfd0d1d2d3d4d5d6d7", "83a563e8df2cf14e392aaadf6c042c9dba3a59ab92082010fc3dfca45de09eaafe8807dc17f879a26f72f4af6d91025cf02573dc1adf679cbbe791667548481b3d85d4d89f1752184ec81610a697d22a55f00ce3dc6cafb495c45fe8927aabc9dff67f1ca8d0a60eebe0e219f4a7bab532667e556648f8957221f951da8b31a3"),
];
