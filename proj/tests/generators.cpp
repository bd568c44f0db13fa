int gradl_placeholder_generators;
