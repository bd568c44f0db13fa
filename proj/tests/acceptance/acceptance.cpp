int gradl_placeholder_acceptance;
