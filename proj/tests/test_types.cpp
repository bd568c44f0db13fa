int gradl_placeholder_test_types;
