"""
neural_scl 主程序包

联合神经结构对应学习（joint neural SCL）无监督领域适应工具，
包含基线系统、枢纽特征选择策略以及完整的评测流程。
"""

__version__ = "0.1.0"
