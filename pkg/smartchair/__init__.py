"""
smartchair - 智能座椅电竞选手技能预测

从座椅 IMU 数据中提取行为特征，训练分类器并评估选手水平预测效果。
"""

__version__ = "0.1.0"
