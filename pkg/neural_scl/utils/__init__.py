"""
neural_scl 工具包

包含配置管理、异常定义、检查点编解码和运行清单等辅助模块
"""
