"""
评估：按选手分组的重复留出、ROC/AUC、特征重要性与报告输出
"""
