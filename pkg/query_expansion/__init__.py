from query_expansion.config_parser import get_config

CONFIG = get_config()
